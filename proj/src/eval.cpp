#include "mathsmith/eval.hpp"

#include <algorithm>
#include <regex>

#include <boost/multiprecision/cpp_int.hpp>

#include "mathsmith/dataset_io.hpp"
#include "mathsmith/errors.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

using boost::multiprecision::cpp_int;

std::string render_eval_prompt(const std::string& question, const EvalConfig& config) {
    if (config.template_name == "alpaca") return render_alpaca(question);
    if (config.template_name != "custom")
        raise(Errc::bad_template, "unknown template: " + config.template_name);

    const std::string slot = "{question}";
    size_t first = config.custom_template.find(slot);
    if (first == std::string::npos)
        raise(Errc::bad_template, "custom template has no {question} slot");
    if (config.custom_template.find(slot, first + slot.size()) != std::string::npos)
        raise(Errc::bad_template, "custom template has more than one {question} slot");
    return replace_all(config.custom_template, slot, question);
}

// ---------------------------------------------------------------------------
// Answer extraction

namespace {

// Content of "\boxed{...}" ending at the matching brace; nullopt when the
// braces never balance.
std::optional<std::string> balanced_braces(const std::string& text, size_t open_brace) {
    int depth = 0;
    for (size_t i = open_brace; i < text.size(); ++i) {
        if (text[i] == '{') {
            ++depth;
        } else if (text[i] == '}') {
            --depth;
            if (depth == 0) return text.substr(open_brace + 1, i - open_brace - 1);
        }
    }
    return std::nullopt;
}

std::string strip_terminal_punct(std::string s) {
    while (!s.empty()) {
        char c = s.back();
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') {
            s.pop_back();
        } else {
            break;
        }
    }
    return trim(s);
}

} // namespace

std::optional<std::string> extract_answer(const std::string& completion) {
    // Rule 1: last \boxed{...} with balanced braces.
    const std::string boxed = "\\boxed{";
    for (size_t pos = completion.rfind(boxed); pos != std::string::npos;
         pos = (pos == 0) ? std::string::npos : completion.rfind(boxed, pos - 1)) {
        if (auto content = balanced_braces(completion, pos + boxed.size() - 1)) {
            std::string answer = trim(*content);
            if (!answer.empty()) return answer;
        }
        if (pos == 0) break;
    }

    // Rule 2: text after the last answer marker, up to end of line.
    size_t marker_end = std::string::npos;
    for (const char* marker : {"the answer is", "answer:"}) {
        size_t search = 0;
        while (true) {
            size_t hit = find_ci(completion, marker, search);
            if (hit == std::string::npos) break;
            size_t end = hit + std::string(marker).size();
            if (marker_end == std::string::npos || end > marker_end) marker_end = end;
            search = hit + 1;
        }
    }
    if (marker_end != std::string::npos) {
        size_t eol = completion.find('\n', marker_end);
        std::string rest = completion.substr(
            marker_end, eol == std::string::npos ? std::string::npos : eol - marker_end);
        rest = trim(rest);
        while (!rest.empty() && rest.front() == ':') rest = trim(rest.substr(1));
        rest = strip_terminal_punct(rest);
        if (!rest.empty()) return rest;
    }

    // Rule 3: last number-like token.
    static const std::regex number(R"([-+]?(?:\d+\.\d+|\.\d+|\d+/\d+|\d+)%?)");
    std::optional<std::string> last;
    for (auto it = std::sregex_iterator(completion.begin(), completion.end(), number);
         it != std::sregex_iterator(); ++it) {
        last = it->str();
    }
    return last;
}

// ---------------------------------------------------------------------------
// Verification

std::string normalize_answer(const std::string& answer) {
    std::string s = answer;
    // Unicode minus to ASCII.
    s = replace_all(s, "\xE2\x88\x92", "-");
    s = replace_all(s, "\\dfrac", "\\frac");
    s = replace_all(s, "\\tfrac", "\\frac");
    s = replace_all(s, "\\left", "");
    s = replace_all(s, "\\right", "");
    // LaTeX spacing commands (longest first).
    for (const char* cmd : {"\\qquad", "\\quad", "\\,", "\\;", "\\:", "\\!", "\\ ", "~"})
        s = replace_all(s, cmd, "");

    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (uc >= 0x80) {
            out.push_back(c);
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') continue;
        if (c == '$') continue;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        out.push_back(c);
    }

    size_t begin = 0;
    auto decorative = [](char c) {
        return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
    };
    while (begin < out.size() && decorative(out[begin])) ++begin;
    size_t end = out.size();
    while (end > begin && decorative(out[end - 1])) --end;
    return out.substr(begin, end - begin);
}

namespace {

struct Rational {
    cpp_int num;
    cpp_int den; // always > 0
};

std::optional<Rational> parse_plain_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') {
        negative = s[i] == '-';
        ++i;
    }
    std::string digits;
    cpp_int den = 1;
    bool saw_digit = false;
    bool saw_dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
            saw_digit = true;
            if (saw_dot) den *= 10;
        } else if (c == '.' && !saw_dot) {
            saw_dot = true;
        } else {
            return std::nullopt;
        }
    }
    if (!saw_digit) return std::nullopt;
    cpp_int num(digits.empty() ? "0" : digits);
    if (negative) num = -num;
    return Rational{num, den};
}

std::optional<Rational> parse_rational(const std::string& normalized);

std::optional<Rational> divide(const Rational& a, const Rational& b) {
    if (b.num == 0) return std::nullopt;
    Rational out;
    out.num = a.num * b.den;
    out.den = a.den * b.num;
    if (out.den < 0) {
        out.den = -out.den;
        out.num = -out.num;
    }
    return out;
}

// Accepts (on tier-a normalized text): integers, decimals, a/b, \frac{a}{b},
// and any of those with a % suffix.
std::optional<Rational> parse_rational(const std::string& normalized) {
    if (normalized.empty()) return std::nullopt;
    std::string s = normalized;

    if (s.back() == '%') {
        auto inner = parse_rational(s.substr(0, s.size() - 1));
        if (!inner) return std::nullopt;
        return divide(*inner, Rational{100, 1});
    }

    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        s = s.substr(1);
    }
    auto negate = [&](std::optional<Rational> r) {
        if (r && negative) r->num = -r->num;
        return r;
    };

    const std::string frac = "\\frac{";
    if (s.rfind(frac, 0) == 0) {
        int depth = 0;
        size_t split = std::string::npos;
        for (size_t i = frac.size() - 1; i < s.size(); ++i) {
            if (s[i] == '{') ++depth;
            if (s[i] == '}') {
                --depth;
                if (depth == 0) {
                    split = i;
                    break;
                }
            }
        }
        if (split == std::string::npos || split + 1 >= s.size() || s[split + 1] != '{' ||
            s.back() != '}')
            return std::nullopt;
        std::string a = s.substr(frac.size(), split - frac.size());
        std::string b = s.substr(split + 2, s.size() - split - 3);
        auto ra = parse_plain_number(a);
        auto rb = parse_plain_number(b);
        if (!ra || !rb) return std::nullopt;
        return negate(divide(*ra, *rb));
    }

    size_t slash = s.find('/');
    if (slash != std::string::npos) {
        auto ra = parse_plain_number(s.substr(0, slash));
        auto rb = parse_plain_number(s.substr(slash + 1));
        if (!ra || !rb) return std::nullopt;
        return negate(divide(*ra, *rb));
    }

    return negate(parse_plain_number(s));
}

cpp_int abs_value(const cpp_int& x) { return x < 0 ? cpp_int(-x) : x; }

// |a| <= |b| on positive-denominator rationals.
bool abs_leq(const Rational& a, const Rational& b) {
    return abs_value(a.num) * b.den <= abs_value(b.num) * a.den;
}

// Exact test of |a - b| <= tol * max(|a|, |b|) with tol = 1/10000. The max
// form keeps the comparison symmetric in its arguments.
bool numeric_equal(const Rational& a, const Rational& b) {
    Rational diff{a.num * b.den - b.num * a.den, a.den * b.den};
    const Rational& larger = abs_leq(a, b) ? b : a;
    // |diff| <= (1/10000) * |larger|
    return abs_value(diff.num) * larger.den * 10000 <= abs_value(larger.num) * diff.den;
}

// Splits on commas that sit outside every brace/bracket/paren nesting level.
std::vector<std::string> split_multipart(const std::string& s) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string current;
    for (char c : s) {
        if (c == '{' || c == '(' || c == '[') ++depth;
        if (c == '}' || c == ')' || c == ']') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(trim(current));
    return parts;
}

bool single_part_equal(const std::string& extracted, const std::string& gold) {
    std::string ne = normalize_answer(extracted);
    std::string ng = normalize_answer(gold);
    if (ne == ng) return true;
    auto re = parse_rational(ne);
    auto rg = parse_rational(ng);
    if (re && rg) return numeric_equal(*re, *rg);
    return false;
}

// Backtracking perfect matching; part lists are tiny.
bool match_unordered(const std::vector<std::string>& a, const std::vector<std::string>& b,
                     std::vector<bool>& used, size_t i) {
    if (i == a.size()) return true;
    for (size_t j = 0; j < b.size(); ++j) {
        if (used[j] || !single_part_equal(a[i], b[j])) continue;
        used[j] = true;
        if (match_unordered(a, b, used, i + 1)) return true;
        used[j] = false;
    }
    return false;
}

} // namespace

bool verify(const std::string& extracted, const std::string& gold) {
    if (single_part_equal(extracted, gold)) return true;

    std::vector<std::string> extracted_parts = split_multipart(extracted);
    std::vector<std::string> gold_parts = split_multipart(gold);
    if (extracted_parts.size() < 2 || extracted_parts.size() != gold_parts.size()) return false;
    std::vector<bool> used(gold_parts.size(), false);
    return match_unordered(extracted_parts, gold_parts, used, 0);
}

// ---------------------------------------------------------------------------
// Aggregation and the protocol loop

EvalReport aggregate(const std::vector<EvalRecord>& records,
                     const std::vector<std::string>& known_datasets) {
    std::map<std::string, DatasetScore> by_dataset;
    if (!known_datasets.empty()) {
        for (const EvalRecord& record : records) {
            if (std::find(known_datasets.begin(), known_datasets.end(), record.dataset) ==
                known_datasets.end())
                raise(Errc::unknown_dataset, "record references unknown dataset: " + record.dataset);
        }
    }
    for (const EvalRecord& record : records) {
        DatasetScore& score = by_dataset[record.dataset];
        score.name = record.dataset;
        score.total++;
        if (record.verdict) score.correct++;
    }

    EvalReport report;
    auto append = [&](const DatasetScore& score) {
        DatasetScore out = score;
        out.accuracy = score.total > 0
                           ? static_cast<double>(score.correct) / static_cast<double>(score.total)
                           : 0.0;
        report.datasets.push_back(out);
        report.total += score.total;
        report.correct += score.correct;
    };
    if (!known_datasets.empty()) {
        // Preserve the caller's dataset order; zero-item datasets drop out.
        for (const std::string& name : known_datasets) {
            auto it = by_dataset.find(name);
            if (it != by_dataset.end()) append(it->second);
        }
    } else {
        for (const auto& [name, score] : by_dataset) append(score);
    }

    report.micro = report.total > 0
                       ? static_cast<double>(report.correct) / static_cast<double>(report.total)
                       : 0.0;
    double macro_sum = 0.0;
    for (const DatasetScore& score : report.datasets) macro_sum += score.accuracy;
    report.macro = report.datasets.empty() ? 0.0 : macro_sum / static_cast<double>(report.datasets.size());
    return report;
}

std::vector<EvalRecord> run_eval(ModelDriver& driver, const std::vector<EvalItem>& items,
                                 const EvalConfig& config) {
    std::vector<EvalRecord> records;
    records.reserve(items.size());
    for (const EvalItem& item : items) {
        EvalRecord record;
        record.dataset = item.dataset;
        record.id = item.id;
        record.gold = item.gold;
        try {
            record.completion = driver.generate(render_eval_prompt(item.question, config));
        } catch (const Error& e) {
            if (e.code() == Errc::bad_template) throw;
            raise(Errc::driver, "driver failed on question " + item.id + ": " + e.what());
        } catch (const std::exception& e) {
            raise(Errc::driver, "driver failed on question " + item.id + ": " + e.what());
        }
        record.extracted = extract_answer(record.completion);
        record.verdict = record.extracted.has_value() && !item.gold.empty() &&
                         verify(*record.extracted, item.gold);
        records.push_back(std::move(record));
    }
    return records;
}

} // namespace mathsmith
