#include "mathsmith/dataset_io.hpp"

#include <algorithm>

#include "mathsmith/errors.hpp"
#include "mathsmith/io.hpp"
#include "mathsmith/prompts.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

namespace fs = std::filesystem;

std::string render_alpaca(const std::string& question) {
    if (question.empty()) raise(Errc::precondition, "cannot render an empty question");
    return replace_all(prompts::kAlpaca, "{question}", question);
}

std::vector<TrainingRecord> merge_training_sets(const std::vector<QAPair>& generated,
                                                const std::vector<SeedQuestion>& seeds) {
    std::vector<const SeedQuestion*> seed_order;
    seed_order.reserve(seeds.size());
    for (const SeedQuestion& seed : seeds) seed_order.push_back(&seed);
    std::stable_sort(seed_order.begin(), seed_order.end(), [](const auto* a, const auto* b) {
        if (a->dataset != b->dataset) return a->dataset < b->dataset;
        return a->id < b->id;
    });

    std::vector<const QAPair*> generated_order;
    generated_order.reserve(generated.size());
    for (const QAPair& pair : generated) generated_order.push_back(&pair);
    std::stable_sort(generated_order.begin(), generated_order.end(),
                     [](const auto* a, const auto* b) { return a->composition_id < b->composition_id; });

    std::vector<TrainingRecord> records;
    records.reserve(seeds.size() + generated.size());
    for (const SeedQuestion* seed : seed_order)
        records.push_back({render_alpaca(seed->question), seed->answer, Origin::seed});
    for (const QAPair* pair : generated_order)
        records.push_back({render_alpaca(pair->question), pair->solution, Origin::generated});
    return records;
}

std::vector<SeedQuestion> load_dataset(const fs::path& path) {
    std::vector<SeedQuestion> records;
    for_each_jsonl(path, [&](size_t lineno, const Json& record) {
        for (const char* field : {"id", "dataset", "question", "answer", "split"}) {
            if (!record.contains(field) || !record[field].is_string())
                raise(Errc::malformed_record, path.string() + ":" + std::to_string(lineno) +
                                                  ": missing field '" + field + "'");
        }
        SeedQuestion seed;
        seed.id = record["id"].get<std::string>();
        seed.dataset = record["dataset"].get<std::string>();
        seed.question = record["question"].get<std::string>();
        seed.answer = record["answer"].get<std::string>();
        seed.split = split_from_name(record["split"].get<std::string>());
        records.push_back(std::move(seed));
    });
    return records;
}

std::string dataset_to_string(const std::vector<SeedQuestion>& records) {
    std::vector<Json> lines;
    lines.reserve(records.size());
    for (const SeedQuestion& seed : records) {
        Json record;
        record["id"] = seed.id;
        record["dataset"] = seed.dataset;
        record["question"] = seed.question;
        record["answer"] = seed.answer;
        record["split"] = split_name(seed.split);
        lines.push_back(std::move(record));
    }
    return jsonl_to_string(lines);
}

void write_dataset_atomic(const fs::path& path, const std::vector<SeedQuestion>& records) {
    write_text_file_atomic(path, dataset_to_string(records));
}

DatasetManifest load_manifest(const fs::path& path, bool validate_counts) {
    Json doc = Json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("datasets"))
        raise(Errc::malformed_record, "manifest is not a JSON object with 'datasets': " + path.string());

    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& p) -> fs::path {
        if (p.empty()) return {};
        fs::path candidate(p);
        return candidate.is_absolute() ? candidate : base / candidate;
    };

    DatasetManifest manifest;
    for (const auto& node : doc["datasets"]) {
        DatasetEntry entry;
        entry.name = node.at("name").get<std::string>();
        entry.level = node.value("level", "");
        entry.difficulty = node.value("difficulty", "");
        entry.question_type = node.value("question_type", "");
        entry.language = node.value("language", "");
        entry.train_count = node.value("train_count", int64_t{0});
        entry.test_count = node.value("test_count", int64_t{0});
        entry.train_path = resolve(node.value("train_path", ""));
        entry.test_path = resolve(node.value("test_path", ""));
        manifest.datasets.push_back(std::move(entry));
    }

    if (validate_counts) {
        for (const DatasetEntry& entry : manifest.datasets) {
            auto check = [&](const fs::path& file, int64_t expected, const char* which) {
                if (expected == 0 && file.empty()) return;
                if (file.empty())
                    raise(Errc::manifest_mismatch, entry.name + ": " + which + "_count is " +
                                                       std::to_string(expected) + " but no path given");
                int64_t actual = static_cast<int64_t>(load_dataset(file).size());
                if (actual != expected)
                    raise(Errc::manifest_mismatch,
                          entry.name + ": manifest says " + std::to_string(expected) + " " + which +
                              " records, file has " + std::to_string(actual));
            };
            check(entry.train_path, entry.train_count, "train");
            check(entry.test_path, entry.test_count, "test");
        }
    }
    return manifest;
}

void write_training_records_atomic(const fs::path& path,
                                   const std::vector<TrainingRecord>& records) {
    std::vector<Json> lines;
    lines.reserve(records.size());
    for (const TrainingRecord& record : records) {
        Json line;
        line["prompt"] = record.prompt;
        line["completion"] = record.completion;
        line["origin"] = record.origin == Origin::seed ? "seed" : "generated";
        lines.push_back(std::move(line));
    }
    write_text_file_atomic(path, jsonl_to_string(lines));
}

std::vector<TrainingRecord> load_training_records(const fs::path& path) {
    std::vector<TrainingRecord> records;
    for_each_jsonl(path, [&](size_t lineno, const Json& record) {
        for (const char* field : {"prompt", "completion", "origin"}) {
            if (!record.contains(field))
                raise(Errc::malformed_record, path.string() + ":" + std::to_string(lineno) +
                                                  ": missing field '" + field + "'");
        }
        TrainingRecord out;
        out.prompt = record["prompt"].get<std::string>();
        out.completion = record["completion"].get<std::string>();
        out.origin = record["origin"].get<std::string>() == "generated" ? Origin::generated
                                                                        : Origin::seed;
        records.push_back(std::move(out));
    });
    return records;
}

} // namespace mathsmith
