#ifndef SIGVAR_INGEST_HPP
#define SIGVAR_INGEST_HPP

// Dataset manifests and per-repetition train/test splits.
//
// Manifest JSON:
//   {
//     "name": "gpds", "canvas": [952, 1360],
//     "genuine_per_writer": 24, "skilled_per_writer": 30,     (optional)
//     "features": "vectors.txt",                               (optional)
//     "writers": [{"id": "431", "genuine": [...], "skilled": [...]}]
//   }
// Relative paths resolve against the manifest's directory.

#include "sigvar/preprocess.hpp"
#include "sigvar/random.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sigvar {

struct WriterEntry
{
    std::string id;
    std::vector<std::filesystem::path> genuine;
    std::vector<std::filesystem::path> skilled;
};

struct DatasetHandle
{
    std::string name;
    CanvasSize canvas = gpds_canvas;
    std::vector<WriterEntry> writers;
    std::optional<std::size_t> genuine_per_writer;
    std::optional<std::size_t> skilled_per_writer;
    std::optional<std::filesystem::path> feature_store;
};

/// Canvas for a dataset name (gpds, cedar, mcyt); nullopt for others.
std::optional<CanvasSize> default_canvas(std::string_view dataset_name);

/// Parses and validates a manifest: ids unique, files present, declared
/// counts honoured. Paths in the result are absolute or manifest-relative resolved.
DatasetHandle load_manifest(const std::filesystem::path &path);

/// Writes a manifest; paths are stored relative to the manifest directory when possible.
void save_manifest(const DatasetHandle &handle, const std::filesystem::path &path);

/// Sample counts per writer, all that the splitter needs.
struct WriterCounts
{
    std::size_t genuine = 0;
    std::size_t skilled = 0;
};

std::vector<WriterCounts> writer_counts(const DatasetHandle &handle);

struct SplitConfig
{
    std::size_t train_genuine = 1;     ///< r
    std::size_t random_per_writer = 14;
    std::size_t random_writers = 0;    ///< writers contributing negatives; 0 = every other writer
    std::size_t test_genuine = 10;
    std::size_t test_random = 10;
    std::size_t test_skilled = 10;

    static SplitConfig gpds(std::size_t r = 1);
    static SplitConfig mcyt(std::size_t r = 1);
    static SplitConfig cedar(std::size_t r = 1);
};

struct SampleRef
{
    std::size_t writer = 0;
    std::size_t index = 0;

    friend bool operator==(const SampleRef &, const SampleRef &) = default;
    friend auto operator<=>(const SampleRef &, const SampleRef &) = default;
};

struct WriterSplit
{
    std::vector<std::size_t> train_genuine;
    std::vector<SampleRef> train_random; ///< other writers' genuine samples
    std::vector<std::size_t> test_genuine;
    std::vector<std::size_t> test_skilled;
    std::vector<SampleRef> test_random;  ///< disjoint from train_random
};

/// One repetition's split for every writer. Genuine samples of a writer
/// are shuffled once: the first r train, the last test_genuine test.
std::vector<WriterSplit> split(const std::vector<WriterCounts> &writers, const SplitConfig &config, Rng &rng);
std::vector<WriterSplit> split(const DatasetHandle &handle, const SplitConfig &config, Rng &rng);

} // namespace sigvar

#endif // SIGVAR_INGEST_HPP
