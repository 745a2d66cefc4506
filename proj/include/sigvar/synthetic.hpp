#ifndef SIGVAR_SYNTHETIC_HPP
#define SIGVAR_SYNTHETIC_HPP

// Deterministic synthetic signature corpus. Each writer owns a prototype of
// a few Bezier strokes plus an anisotropic variability profile; genuine
// samples perturb the prototype within that profile, skilled forgeries
// imitate it with a forger's coarser, shakier hand.

#include "sigvar/image.hpp"
#include "sigvar/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sigvar {

struct SyntheticConfig
{
    int writers = 20;
    int genuine = 24;
    int skilled = 10;
    Eigen::Index height = 200;
    Eigen::Index width = 300;
    std::uint64_t seed = 2024;
    int jobs = 1;
};

/// Canvas that holds every synthetic image.
inline constexpr CanvasSize synthetic_canvas{240, 340};

struct SyntheticWriter
{
    std::string id;
    std::vector<SignatureImage> genuine;
    std::vector<SignatureImage> skilled;
};

std::vector<SyntheticWriter> generate_synthetic(const SyntheticConfig &config);

/// Writes <dir>/<id>/g_NN.png, s_NN.png and <dir>/manifest.json; returns the manifest.
DatasetHandle write_synthetic(const SyntheticConfig &config, const std::filesystem::path &directory);

} // namespace sigvar

#endif // SIGVAR_SYNTHETIC_HPP
