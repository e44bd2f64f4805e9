#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mathsmith/concepts.hpp"
#include "mathsmith/qa.hpp"

namespace mathsmith {

struct DatasetEntry {
    std::string name;
    std::string level;
    std::string difficulty;
    std::string question_type;
    std::string language;
    int64_t train_count = 0;
    int64_t test_count = 0;
    std::filesystem::path train_path; // empty when train_count == 0
    std::filesystem::path test_path;
};

struct DatasetManifest {
    std::vector<DatasetEntry> datasets;
};

enum class Origin { seed, generated };

struct TrainingRecord {
    std::string prompt;     // Alpaca-rendered question
    std::string completion;
    Origin origin = Origin::seed;
};

// Byte-exact instantiation of the instruction-tuning prompt wrapper.
std::string render_alpaca(const std::string& question);

// Seeds first (ordered by dataset then id), then generated pairs (ordered by
// composition id). No cross-origin dedup: the same question may appear with
// both origins.
std::vector<TrainingRecord> merge_training_sets(const std::vector<QAPair>& generated,
                                                const std::vector<SeedQuestion>& seeds);

// Manifest: JSON file with a "datasets" array mirroring the benchmark
// statistics columns. Relative file paths resolve against the manifest's
// directory. Raises Errc::manifest_mismatch when a count disagrees with the
// file's record count.
DatasetManifest load_manifest(const std::filesystem::path& path, bool validate_counts = true);

// Line-delimited {id, dataset, question, answer, split} records. Malformed
// lines raise Errc::malformed_record carrying the 1-based line number.
std::vector<SeedQuestion> load_dataset(const std::filesystem::path& path);
void write_dataset_atomic(const std::filesystem::path& path,
                          const std::vector<SeedQuestion>& records);
std::string dataset_to_string(const std::vector<SeedQuestion>& records);

void write_training_records_atomic(const std::filesystem::path& path,
                                   const std::vector<TrainingRecord>& records);
std::vector<TrainingRecord> load_training_records(const std::filesystem::path& path);

} // namespace mathsmith
