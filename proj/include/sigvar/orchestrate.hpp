#ifndef SIGVAR_ORCHESTRATE_HPP
#define SIGVAR_ORCHESTRATE_HPP

// Per-writer parameter optimization: one swarm per writer minimizing the
// genuine-vs-synthetic |silhouette|, then the componentwise mean of the
// per-writer optima. Parameter files are versioned JSON.

#include "sigvar/augment_feature.hpp"
#include "sigvar/augment_image.hpp"
#include "sigvar/evaluate.hpp"
#include "sigvar/features.hpp"
#include "sigvar/image.hpp"
#include "sigvar/ingest.hpp"
#include "sigvar/swarm.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sigvar {

enum class PipelineMode
{
    image,  ///< sinusoidal duplicator over the duplicator search box
    feature ///< Gaussian filter over feature vectors
};

std::string_view to_string(PipelineMode mode);
PipelineMode parse_pipeline_mode(std::string_view text);
ParameterKind parameter_kind(PipelineMode mode);

/// Genuine samples of one writer. Image mode reads `images`, feature mode `features`.
struct WriterSet
{
    std::string id;
    std::vector<SignatureImage> images;
    FeatureMatrix features;

    std::size_t sample_count(PipelineMode mode) const;
};

struct SigvarConfig
{
    PipelineMode mode = PipelineMode::feature;
    int n_per = 1; ///< synthetic samples per genuine sample during fitness evaluation
    int iterations = 50;
    int particles = 30;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool skip_invalid = false; ///< skip writers with fewer than two samples instead of failing
    PerturbMode perturb = PerturbMode::smooth;
    CanvasSize canvas = gpds_canvas;
    DuplicatorConfig duplicator; ///< variability is replaced by each particle
    Extractor extractor = baseline_extractor();
};

struct WriterOptimum
{
    std::string writer_id;
    ParameterVector best;
    double abs_silhouette = 0.0;
    std::vector<IterationRecord> trace;
    std::uint64_t seed = 0;
};

struct OptimizationResult
{
    ParameterKind kind = ParameterKind::gaussian;
    std::vector<WriterOptimum> per_writer;
    ParameterVector average;
    std::uint64_t seed = 0;
    std::string config_fingerprint;
    std::vector<std::string> skipped;
    /// Extra duplicator parameters carried along with a duplicator vector.
    std::map<std::string, double> passthrough;
};

inline constexpr int parameter_schema_version = 1;

/// Componentwise arithmetic mean.
ParameterVector average_parameters(std::span<const ParameterVector> vectors);

/// Swarm seed for one writer: depends on the master seed and the writer id only.
std::uint64_t writer_seed(std::uint64_t master, std::string_view writer_id);

/// Stable digest of the settings that influence results (not jobs).
std::string config_fingerprint(const SigvarConfig &config);

/// Fitness for one writer under the configured pipeline. In image mode the
/// genuine features are extracted once here.
Fitness writer_fitness(const WriterSet &writer, const SigvarConfig &config);

OptimizationResult sigvar_optimize(std::span<const WriterSet> writers, const SigvarConfig &config);

void save_parameters(const OptimizationResult &result, const std::filesystem::path &path);
OptimizationResult load_parameters(const std::filesystem::path &path);

/// Duplicator configuration from a loaded duplicator parameter file.
DuplicatorConfig duplicator_config(const OptimizationResult &result);

/// Images of every writer in manifest order: genuine, then skilled.
struct WriterImages
{
    std::string id;
    std::vector<SignatureImage> genuine;
    std::vector<SignatureImage> skilled;
};

std::vector<WriterImages> load_images(const DatasetHandle &handle, int jobs);

/// Feature vectors for every writer: read from the manifest's feature store
/// when present, otherwise normalized and extracted from the images.
FeatureDataset load_feature_dataset(const DatasetHandle &handle, const Extractor &extractor, int jobs);

/// Extracts already-loaded images.
FeatureDataset extract_feature_dataset(const std::vector<WriterImages> &images, const Extractor &extractor,
                                       CanvasSize canvas, int jobs);

/// Augmenter that duplicates the genuine image behind each sample and
/// extracts the duplicates.
SampleAugmenter image_augmenter(std::shared_ptr<const std::vector<WriterImages>> images,
                                const DuplicatorConfig &config, const Extractor &extractor, CanvasSize canvas);

} // namespace sigvar

#endif // SIGVAR_ORCHESTRATE_HPP
