/* Compiles as plain C against the shared library header. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "mathsmith/mathsmith.h"

static int failures = 0;

static void expect(int condition, const char* label) {
    if (!condition) {
        fprintf(stderr, "FAIL: %s\n", label);
        failures++;
    }
}

int main(void) {
    expect(strcmp(ms_version(), "0.1.0") == 0, "version");

    char* rendered = NULL;
    expect(ms_render_alpaca("Q", &rendered) == MS_OK, "render status");
    expect(rendered != NULL && strstr(rendered, "### Instruction:\nQ") != NULL, "render content");
    ms_string_free(rendered);

    char* answer = NULL;
    expect(ms_extract_answer("totals 12 then 19", &answer) == MS_OK, "extract status");
    expect(answer != NULL && strcmp(answer, "19") == 0, "extract value");
    ms_string_free(answer);

    int verdict = 0;
    expect(ms_verify_answer("0.5", "1/2", &verdict) == MS_OK && verdict == 1, "verify equal");
    expect(ms_verify_answer("0.5", "2", &verdict) == MS_OK && verdict == 0, "verify unequal");

    expect(ms_render_alpaca(NULL, &rendered) == MS_ERR_INVALID_ARGUMENT, "null argument");
    expect(strlen(ms_last_error()) > 0, "error message populated");

    if (failures > 0) {
        fprintf(stderr, "%d C API check(s) failed\n", failures);
        return 1;
    }
    printf("C API checks passed\n");
    return 0;
}
