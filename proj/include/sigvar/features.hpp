#ifndef SIGVAR_FEATURES_HPP
#define SIGVAR_FEATURES_HPP

// Feature extraction boundary and the on-disk vector store.
//
// Text store:
//   dim=<D>
//   <writer_id>,<sample_id>,<label>,v1,...,vD        (one record per line)
// Binary store: "SVFV", u32 D, u32 count, then per record u32 writer,
// u32 sample, u32 label followed by D little-endian f64.

#include "sigvar/image.hpp"
#include "sigvar/metrics.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace sigvar {

/// Maps a normalized 150x220 image to a feature vector.
using Extractor = std::function<FeatureVector(const SignatureImage &)>;

/// Grid descriptor standing in for a learned extractor: a 10x11 grid of
/// 15x20 cells, per cell (mean, std, ink fraction, centroid x, centroid y).
namespace baseline {
inline constexpr Eigen::Index grid_rows = 10;
inline constexpr Eigen::Index grid_cols = 11;
inline constexpr Eigen::Index cell_height = 15;
inline constexpr Eigen::Index cell_width = 20;
inline constexpr Eigen::Index per_cell = 5;
inline constexpr Eigen::Index dimension = grid_rows * grid_cols * per_cell; // 550
} // namespace baseline

/// Baseline descriptor. Intensities are scaled to [0, 1]; centroid offsets
/// are relative to the cell centre in cell units, 0 for empty cells.
FeatureVector extract(const SignatureImage &normalized);

Extractor baseline_extractor();

enum class SampleLabel
{
    genuine,
    forgery_skilled,
    forgery_random
};

std::string_view to_string(SampleLabel label);
SampleLabel parse_sample_label(std::string_view text);

struct VectorRecord
{
    std::string writer;
    std::string sample;
    SampleLabel label = SampleLabel::genuine;
    FeatureVector values;
};

struct VectorStore
{
    Eigen::Index dimension = 0;
    std::vector<VectorRecord> records;
};

/// Reads a text or binary store (detected by the magic bytes). Rejects
/// non-finite entries and dimension mismatches, naming the offending record.
VectorStore load_precomputed(const std::filesystem::path &path);

void save_text(const VectorStore &store, const std::filesystem::path &path);
void save_binary(const VectorStore &store, const std::filesystem::path &path);

/// Vectors of one label grouped by writer, one column per sample in file order.
std::map<std::string, FeatureMatrix> group_by_writer(const VectorStore &store,
                                                     SampleLabel label = SampleLabel::genuine);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

} // namespace sigvar

#endif // SIGVAR_FEATURES_HPP
