#ifndef SIGVAR_EVALUATE_HPP
#define SIGVAR_EVALUATE_HPP

// Equal error rate and the repeated writer-dependent evaluation protocol:
// per repetition, split every writer, add d synthetic samples per training
// sample, train one classifier per writer, score the test split, and pool
// the scores into an EER.

#include "sigvar/augment_feature.hpp"
#include "sigvar/ingest.hpp"
#include "sigvar/metrics.hpp"
#include "sigvar/verify.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sigvar {

struct EerResult
{
    double eer = 0.0;
    double far = 0.0;
    double frr = 0.0;
    double threshold = 0.0;
};

/// Error rates at threshold t: a score is accepted when above t, scores
/// equal to t count half as errors on each side.
struct ErrorRates
{
    double far = 0.0;
    double frr = 0.0;
};

ErrorRates error_rates_at(std::span<const double> genuine_sorted, std::span<const double> forgery_sorted,
                          double threshold);

/// Sweeps thresholds over -inf, every distinct pooled score, the midpoints
/// between consecutive distinct scores and +inf. Picks the lowest threshold
/// minimizing |FAR - FRR| and reports (FAR + FRR) / 2 there.
EerResult compute_eer(std::span<const double> genuine, std::span<const double> forgery);

struct WriterFeatures
{
    std::string id;
    FeatureMatrix genuine; ///< one vector per column
    FeatureMatrix skilled;
};

using FeatureDataset = std::vector<WriterFeatures>;

/// Produces `count` synthetic vectors (as columns) from one genuine sample.
using SampleAugmenter =
    std::function<FeatureMatrix(const SampleRef &sample, const FeatureVector &source, int count, std::uint64_t seed)>;

/// Gaussian-filter augmenter over feature vectors.
SampleAugmenter gaussian_augmenter(const ParameterVector &params, PerturbMode mode = PerturbMode::smooth);

enum class ThresholdMode
{
    global,    ///< one threshold over the pooled scores of all writers
    per_writer ///< EER per writer, averaged
};

struct ProtocolConfig
{
    std::vector<int> train_genuine{1}; ///< r values
    std::vector<int> synthetic{0};     ///< d values
    int repetitions = 10;
    SplitConfig split;                 ///< train_genuine is overridden by each r
    bool augment_negatives = true;
    double gamma = 0.0;                ///< 0 selects default_gamma per classifier
    SvmOptions svm;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct EerRow
{
    int repetition = 0;
    int r = 0;
    int d = 0;
    double eer = 0.0; ///< pooled genuine vs all forgeries, global threshold
    double far = 0.0;
    double frr = 0.0;
    std::uint64_t seed = 0;
    double eer_skilled = 0.0;
    double eer_random = 0.0;     ///< NaN when the split has no random test forgeries
    double eer_per_writer = 0.0; ///< mean of per-writer EERs
};

struct GridCell
{
    int r = 0;
    int d = 0;
    double mean = 0.0;
    double std = 0.0;
    double mean_skilled = 0.0;
    double mean_random = 0.0;
    double mean_per_writer = 0.0;
    double std_per_writer = 0.0;
};

struct EerReport
{
    std::vector<EerRow> rows;
    std::vector<GridCell> grid;
    std::uint64_t seed = 0;
};

/// Runs every (r, d) pair for `repetitions` repetitions. Splits and
/// synthetic samples depend on (seed, repetition, r) only, so d = 0 equals
/// a run without an augmenter. An empty augmenter requires all d = 0.
EerReport run_protocol(const ProtocolConfig &config, const FeatureDataset &data, const SampleAugmenter &augmenter);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(std::span<const double> values);

/// rep,r,d,eer,far,frr,seed
void write_report_csv(const EerReport &report, const std::filesystem::path &path);
/// Per-row skilled, random and per-writer EERs.
void write_detail_csv(const EerReport &report, const std::filesystem::path &path);
void write_summary_json(const EerReport &report, const std::filesystem::path &path);
struct ChartSeries
{
    std::string label;
    std::vector<std::pair<double, double>> points; ///< (x, y), plotted in x order
};

/// Standalone SVG line chart. `table` is embedded verbatim as the data description.
void write_line_chart(const std::vector<ChartSeries> &series, std::string_view x_label, std::string_view y_label,
                      std::string_view table, const std::filesystem::path &path);

/// Line chart of mean EER (%) against d, one series per r, data table embedded.
void write_eer_svg(const EerReport &report, const std::filesystem::path &path);

} // namespace sigvar

#endif // SIGVAR_EVALUATE_HPP
