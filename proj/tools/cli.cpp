#include "cli.hpp"

#include "sigvar/augment_feature.hpp"
#include "sigvar/augment_image.hpp"
#include "sigvar/error.hpp"
#include "sigvar/evaluate.hpp"
#include "sigvar/features.hpp"
#include "sigvar/ingest.hpp"
#include "sigvar/orchestrate.hpp"
#include "sigvar/parallel.hpp"
#include "sigvar/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#ifndef SIGVAR_VERSION
#define SIGVAR_VERSION "dev"
#endif

namespace sigvar::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> parse_int_list(const std::string &text)
{
    auto to_int = [&](std::string_view part) {
        int value = 0;
        const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || end != part.data() + part.size())
            throw ConfigError("invalid integer list '" + text + "'");
        return value;
    };
    std::set<int> values;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view part = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
        if (const auto dots = part.find(".."); dots != std::string_view::npos) {
            const int lo = to_int(part.substr(0, dots));
            const int hi = to_int(part.substr(dots + 2));
            if (hi < lo)
                throw ConfigError("invalid range '" + std::string(part) + "'");
            for (int v = lo; v <= hi; ++v)
                values.insert(v);
        } else {
            values.insert(to_int(part));
        }
    }
    if (values.empty())
        throw ConfigError("empty integer list");
    return {values.begin(), values.end()};
}

std::vector<double> parse_grid(const std::string &text)
{
    std::vector<double> parts;
    std::string_view rest = text;
    while (true) {
        const auto colon = rest.find(':');
        const std::string_view part = rest.substr(0, colon);
        double value = 0.0;
        const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || end != part.data() + part.size())
            throw ConfigError("invalid grid '" + text + "' (expected start:stop:step)");
        parts.push_back(value);
        if (colon == std::string_view::npos)
            break;
        rest = rest.substr(colon + 1);
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw ConfigError("invalid grid '" + text + "' (expected start:stop:step with step > 0)");
    const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    std::vector<double> grid;
    for (long k = 0; k <= steps; ++k)
        grid.push_back(std::round((parts[0] + static_cast<double>(k) * parts[2]) * 1e12) / 1e12);
    return grid;
}

namespace {

/// Binds options and remembers how to write them back as canonical arguments.
class Recorder
{
public:
    explicit Recorder(CLI::App *app) : app_(app) {}

    template<class T>
    CLI::Option *option(const std::string &name, T &value, const std::string &help)
    {
        emit_.push_back([name, &value](std::vector<std::string> &out) {
            out.push_back(name);
            out.push_back(text(value));
        });
        return app_->add_option(name, value, help)->capture_default_str();
    }

    CLI::Option *flag(const std::string &name, bool &value, const std::string &help)
    {
        emit_.push_back([name, &value](std::vector<std::string> &out) {
            if (value)
                out.push_back(name);
        });
        return app_->add_flag(name, value, help);
    }

    std::vector<std::string> arguments() const
    {
        std::vector<std::string> out;
        for (const auto &e : emit_)
            e(out);
        return out;
    }

private:
    static std::string text(const std::string &v) { return v; }
    static std::string text(const fs::path &v) { return v.empty() ? std::string() : fs::absolute(v).string(); }
    static std::string text(double v) { return format_double(v); }
    static std::string text(int v) { return std::to_string(v); }
    static std::string text(std::uint64_t v) { return std::to_string(v); }

    CLI::App *app_;
    std::vector<std::function<void(std::vector<std::string> &)>> emit_;
};

struct Common
{
    std::uint64_t seed = 0;
    int jobs = 0;
};

void add_common(Recorder &rec, Common &common)
{
    rec.option("--seed", common.seed, "Master seed (SIGVAR_SEED overrides)");
    rec.option("--jobs", common.jobs, "Worker threads; 0 uses every logical core");
}

fs::path run_record_path(const fs::path &out, bool directory)
{
    return directory ? out / "run.json" : fs::path(out.string() + ".run.json");
}

void write_run_record(const std::string &command, const std::vector<std::string> &args, const Common &common,
                      const fs::path &record, const std::vector<fs::path> &outputs)
{
    json doc;
    doc["tool"] = "sigvar";
    doc["version"] = SIGVAR_VERSION;
    doc["command"] = command;
    doc["args"] = args;
    doc["seed"] = common.seed;
    doc["jobs"] = resolve_jobs(common.jobs);
    doc["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "."
                   + std::to_string(EIGEN_MINOR_VERSION);
    doc["outputs"] = json::array();
    for (const auto &o : outputs)
        doc["outputs"].push_back(fs::absolute(o).string());
    std::ofstream out(record, std::ios::binary);
    if (!out)
        throw DataError("cannot write run record '" + record.string() + "'");
    out << doc.dump(2) << '\n';
}

void ensure_directory(const fs::path &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void ensure_parent(const fs::path &file)
{
    const auto parent = fs::absolute(file).parent_path();
    if (!parent.empty())
        ensure_directory(parent);
}

std::vector<std::string> split_list(const std::string &text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

/// Keeps the listed writers in the given order; an empty list keeps all.
template<class T>
std::vector<T> select_writers(std::vector<T> all, const std::string &list)
{
    const auto ids = split_list(list);
    if (ids.empty())
        return all;
    std::vector<T> chosen;
    for (const auto &id : ids) {
        const auto it = std::find_if(all.begin(), all.end(), [&](const T &w) { return w.id == id; });
        if (it == all.end())
            throw ConfigError("writer '" + id + "' is not in the manifest");
        chosen.push_back(*it);
    }
    return chosen;
}

DatasetHandle select_handle(DatasetHandle handle, const std::string &list)
{
    handle.writers = select_writers(std::move(handle.writers), list);
    return handle;
}

SplitConfig split_preset(const std::string &name, std::size_t writer_count)
{
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.rfind("gpds", 0) == 0)
        return SplitConfig::gpds();
    if (lower.rfind("mcyt", 0) == 0)
        return SplitConfig::mcyt();
    if (lower.rfind("cedar", 0) == 0)
        return SplitConfig::cedar();
    // Small collections: GPDS-shaped test split, negatives scaled down so
    // that training and test random forgeries still fit in the other writers.
    SplitConfig config = SplitConfig::gpds();
    config.random_per_writer = writer_count > 40 ? 14 : 2;
    return config;
}

// ---------------------------------------------------------------- optimize

struct OptimizeOptions
{
    std::string mode = "feature";
    fs::path manifest;
    std::string writers;
    int iterations = 50;
    int particles = 30;
    int n_per = 1;
    std::string perturb = "smooth";
    bool skip_invalid = false;
    fs::path base;
    fs::path duplicator;
    fs::path out = "params.json";
};

void run_optimize(const OptimizeOptions &o, const Common &common, const std::vector<std::string> &args)
{
    SigvarConfig config;
    config.mode = parse_pipeline_mode(o.mode);
    config.n_per = o.n_per;
    config.iterations = o.iterations;
    config.particles = o.particles;
    config.seed = common.seed;
    config.jobs = common.jobs;
    config.skip_invalid = o.skip_invalid;
    config.perturb = parse_perturb_mode(o.perturb);
    if (!o.base.empty())
        config.duplicator = duplicator_config(load_parameters(o.base));
    if (!o.duplicator.empty())
        config.duplicator.external_executable = fs::absolute(o.duplicator);

    const DatasetHandle handle = select_handle(load_manifest(o.manifest), o.writers);
    config.canvas = handle.canvas;
    std::vector<WriterSet> writers;
    if (config.mode == PipelineMode::image) {
        for (auto &w : load_images(handle, common.jobs))
            writers.push_back({w.id, std::move(w.genuine), {}});
    } else {
        for (auto &w : load_feature_dataset(handle, config.extractor, common.jobs))
            writers.push_back({w.id, {}, std::move(w.genuine)});
    }
    const OptimizationResult result = sigvar_optimize(writers, config);
    ensure_parent(o.out);
    save_parameters(result, o.out);

    std::cout << "writers optimized: " << result.per_writer.size() << ", skipped: " << result.skipped.size() << '\n';
    const auto names = parameter_names(result.kind);
    std::cout << "average:";
    for (Eigen::Index i = 0; i < result.average.size(); ++i)
        std::cout << ' ' << names[static_cast<std::size_t>(i)] << '=' << format_double(result.average[i]);
    std::cout << '\n';
    write_run_record("optimize", args, common, run_record_path(o.out, false), {o.out});
}

// ---------------------------------------------------------------- augment

struct AugmentOptions
{
    std::string mode = "feature";
    fs::path params;
    std::vector<std::string> inputs;
    int count = 1;
    std::string perturb = "smooth";
    fs::path out;
};

void run_augment(const AugmentOptions &o, const Common &common, const std::vector<std::string> &args)
{
    const PipelineMode mode = parse_pipeline_mode(o.mode);
    const OptimizationResult params = load_parameters(o.params);
    if (params.kind != parameter_kind(mode))
        throw ConfigError("parameter file '" + o.params.string() + "' holds " + std::string(to_string(params.kind))
                          + " parameters, " + std::string(to_string(parameter_kind(mode))) + " expected");
    if (o.count < 1)
        throw ConfigError("--count must be at least 1");
    if (o.inputs.empty())
        throw ConfigError("--in requires at least one input");
    std::vector<fs::path> outputs;

    if (mode == PipelineMode::image) {
        std::vector<fs::path> files;
        for (const auto &in : o.inputs) {
            if (fs::is_directory(in)) {
                for (const auto &entry : fs::directory_iterator(in))
                    if (entry.path().extension() == ".png")
                        files.push_back(entry.path());
            } else {
                if (!fs::exists(in))
                    throw DataError("input '" + in + "' does not exist");
                files.push_back(in);
            }
        }
        std::sort(files.begin(), files.end());
        ensure_directory(o.out);
        const DuplicatorConfig config = duplicator_config(params);
        std::vector<std::vector<fs::path>> written(files.size());
        parallel_for(files.size(), common.jobs, [&](std::size_t k) {
            const SignatureImage image = read_png(files[k]);
            Rng rng(derive_seed(common.seed, {hash_string(files[k].filename().string())}));
            const auto duplicates = duplicate(image, config, o.count, rng);
            for (std::size_t i = 0; i < duplicates.size(); ++i) {
                char suffix[32];
                std::snprintf(suffix, sizeof suffix, "_dup%03zu.png", i + 1);
                const fs::path target = o.out / (files[k].stem().string() + suffix);
                write_png(duplicates[i], target);
                written[k].push_back(target);
            }
        });
        for (const auto &w : written)
            outputs.insert(outputs.end(), w.begin(), w.end());
        std::cout << "wrote " << outputs.size() << " duplicates to " << o.out.string() << '\n';
        write_run_record("augment", args, common, run_record_path(o.out, true), outputs);
        return;
    }

    VectorStore merged;
    for (const auto &in : o.inputs) {
        VectorStore store = load_precomputed(in);
        if (merged.dimension != 0 && store.dimension != merged.dimension)
            throw DataError("input '" + in + "' has dimension " + std::to_string(store.dimension) + ", expected "
                            + std::to_string(merged.dimension));
        merged.dimension = store.dimension;
        for (auto &r : store.records)
            merged.records.push_back(std::move(r));
    }
    const PerturbMode perturb = parse_perturb_mode(o.perturb);
    std::vector<std::size_t> sources;
    for (std::size_t k = 0; k < merged.records.size(); ++k)
        if (merged.records[k].label == SampleLabel::genuine)
            sources.push_back(k);
    std::vector<std::vector<FeatureVector>> synthetic(sources.size());
    parallel_for(sources.size(), common.jobs, [&](std::size_t k) {
        const VectorRecord &record = merged.records[sources[k]];
        Rng rng(derive_seed(common.seed, {hash_string(record.writer), hash_string(record.sample)}));
        synthetic[k] = perturb_features(record.values, params.average, o.count, rng, perturb);
    });
    VectorStore out_store;
    out_store.dimension = merged.dimension;
    for (std::size_t k = 0; k < sources.size(); ++k) {
        const VectorRecord &record = merged.records[sources[k]];
        for (std::size_t i = 0; i < synthetic[k].size(); ++i)
            out_store.records.push_back(
                {record.writer, record.sample + "~" + std::to_string(i + 1), SampleLabel::genuine, synthetic[k][i]});
    }
    ensure_parent(o.out);
    save_text(out_store, o.out);
    std::cout << "wrote " << out_store.records.size() << " synthetic vectors to " << o.out.string() << '\n';
    write_run_record("augment", args, common, run_record_path(o.out, false), {o.out});
}

// ---------------------------------------------------------------- sweep-sigma

struct SweepOptions
{
    fs::path manifest;
    std::string writers;
    std::string grid = "0.1:4.0:0.1";
    int n_per = 1;
    std::string perturb = "smooth";
    fs::path out = "curve.csv";
};

void run_sweep(const SweepOptions &o, const Common &common, const std::vector<std::string> &args)
{
    const std::vector<double> grid = parse_grid(o.grid);
    for (double s : grid)
        if (!(s > 0.0))
            throw ConfigError("sigma grid values must be positive");
    const PerturbMode perturb = parse_perturb_mode(o.perturb);
    const DatasetHandle handle = select_handle(load_manifest(o.manifest), o.writers);
    const FeatureDataset data = load_feature_dataset(handle, baseline_extractor(), common.jobs);

    const std::size_t cells = data.size() * grid.size();
    std::vector<double> values(cells);
    parallel_for(cells, common.jobs, [&](std::size_t k) {
        const std::size_t w = k / grid.size();
        const std::size_t g = k % grid.size();
        if (data[w].genuine.cols() < 2)
            throw DataError("writer '" + data[w].id + "' has fewer than two genuine samples");
        Rng rng(derive_seed(writer_seed(common.seed, data[w].id), {0x516, g}));
        values[k] = eval_params_feature(make_gaussian_parameters(grid[g], grid[g]), data[w].genuine, o.n_per, rng,
                                        perturb);
    });

    ensure_parent(o.out);
    std::ofstream csv(o.out, std::ios::binary);
    if (!csv)
        throw DataError("cannot write '" + o.out.string() + "'");
    csv << "writer,sigma,abs_silhouette\n";
    std::ostringstream table;
    table << "sigma,mean_abs_silhouette\n";
    ChartSeries mean{"mean over writers", {}};
    for (std::size_t w = 0; w < data.size(); ++w)
        for (std::size_t g = 0; g < grid.size(); ++g)
            csv << data[w].id << ',' << format_double(grid[g]) << ',' << format_double(values[w * grid.size() + g])
                << '\n';
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (std::size_t w = 0; w < data.size(); ++w)
            sum += values[w * grid.size() + g];
        const double m = sum / static_cast<double>(data.size());
        mean.points.emplace_back(grid[g], m);
        table << format_double(grid[g]) << ',' << format_double(m) << '\n';
    }
    csv.close();
    fs::path svg = o.out;
    svg.replace_extension(".svg");
    write_line_chart({mean}, "sigma", "|silhouette|", table.str(), svg);
    std::cout << "wrote " << cells << " rows to " << o.out.string() << '\n';
    write_run_record("sweep-sigma", args, common, run_record_path(o.out, false), {o.out, svg});
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions
{
    fs::path manifest;
    fs::path params;
    std::string r = "1";
    std::string d = "0";
    int reps = 10;
    std::string preset = "auto";
    int random_per_writer = -1;
    int random_writers = -1;
    int test_genuine = -1;
    int test_random = -1;
    int test_skilled = -1;
    double gamma = 0.0;
    bool no_augment_negatives = false;
    std::string perturb = "smooth";
    fs::path out = "report";
};

void run_evaluate(const EvaluateOptions &o, const Common &common, const std::vector<std::string> &args)
{
    const DatasetHandle handle = load_manifest(o.manifest);
    ProtocolConfig config;
    config.train_genuine = parse_int_list(o.r);
    config.synthetic = parse_int_list(o.d);
    config.repetitions = o.reps;
    config.split = split_preset(o.preset == "auto" ? handle.name : o.preset, handle.writers.size());
    auto apply = [](int value, std::size_t &field) {
        if (value >= 0)
            field = static_cast<std::size_t>(value);
    };
    apply(o.random_per_writer, config.split.random_per_writer);
    apply(o.random_writers, config.split.random_writers);
    apply(o.test_genuine, config.split.test_genuine);
    apply(o.test_random, config.split.test_random);
    apply(o.test_skilled, config.split.test_skilled);
    config.augment_negatives = !o.no_augment_negatives;
    config.gamma = o.gamma;
    config.seed = common.seed;
    config.jobs = common.jobs;

    const bool any_synthetic = std::any_of(config.synthetic.begin(), config.synthetic.end(), [](int d) { return d > 0; });
    if (any_synthetic && o.params.empty())
        throw ConfigError("--params is required when --d includes values above 0");

    FeatureDataset data;
    SampleAugmenter augmenter;
    const Extractor extractor = baseline_extractor();
    if (any_synthetic) {
        const OptimizationResult params = load_parameters(o.params);
        if (params.kind == ParameterKind::duplicator) {
            if (handle.feature_store)
                throw ConfigError("duplicator parameters need images, but the manifest supplies a feature store");
            auto images = std::make_shared<const std::vector<WriterImages>>(load_images(handle, common.jobs));
            data = extract_feature_dataset(*images, extractor, handle.canvas, common.jobs);
            augmenter = image_augmenter(images, duplicator_config(params), extractor, handle.canvas);
        } else {
            data = load_feature_dataset(handle, extractor, common.jobs);
            augmenter = gaussian_augmenter(params.average, parse_perturb_mode(o.perturb));
        }
    } else {
        data = load_feature_dataset(handle, extractor, common.jobs);
    }

    const EerReport report = run_protocol(config, data, augmenter);
    ensure_directory(o.out);
    const fs::path csv = o.out / "eer.csv", detail = o.out / "eer_detail.csv", summary = o.out / "summary.json",
                   svg = o.out / "eer_vs_d.svg";
    write_report_csv(report, csv);
    write_detail_csv(report, detail);
    write_summary_json(report, summary);
    write_eer_svg(report, svg);

    std::cout << "r,d,eer_mean(%),eer_std(%)\n";
    for (const auto &cell : report.grid)
        std::cout << cell.r << ',' << cell.d << ',' << format_double(std::round(cell.mean * 1e4) / 100.0) << ','
                  << format_double(std::round(cell.std * 1e4) / 100.0) << '\n';
    write_run_record("evaluate", args, common, run_record_path(o.out, true), {csv, detail, summary, svg});
}

// ---------------------------------------------------------------- validate-features

struct ValidateOptions
{
    fs::path manifest;
    std::string writers;
    fs::path params_a;
    fs::path params_b;
    int n_per = 1;
    std::string perturb = "smooth";
    fs::path out;
};

void run_validate(const ValidateOptions &o, const Common &common, const std::vector<std::string> &args)
{
    const DatasetHandle handle = select_handle(load_manifest(o.manifest), o.writers);
    const OptimizationResult a = load_parameters(o.params_a);
    const OptimizationResult b = load_parameters(o.params_b);
    const PerturbMode perturb = parse_perturb_mode(o.perturb);
    const Extractor extractor = baseline_extractor();
    const bool need_images = a.kind == ParameterKind::duplicator || b.kind == ParameterKind::duplicator;

    std::vector<WriterImages> images;
    FeatureDataset data;
    if (need_images) {
        if (handle.feature_store)
            throw ConfigError("duplicator parameters need images, but the manifest supplies a feature store");
        images = load_images(handle, common.jobs);
        data = extract_feature_dataset(images, extractor, handle.canvas, common.jobs);
    } else {
        data = load_feature_dataset(handle, extractor, common.jobs);
    }

    const std::array<const OptimizationResult *, 2> params{&a, &b};
    std::vector<double> values(2 * data.size());
    parallel_for(values.size(), common.jobs, [&](std::size_t k) {
        const std::size_t p = k / data.size();
        const std::size_t w = k % data.size();
        if (data[w].genuine.cols() < 2)
            throw DataError("writer '" + data[w].id + "' has fewer than two genuine samples");
        // Both parameter sets see the same random stream per writer.
        Rng rng(derive_seed(writer_seed(common.seed, data[w].id), {0x7A1}));
        const OptimizationResult &param = *params[p];
        if (param.kind == ParameterKind::gaussian) {
            values[k] = eval_params_feature(param.average, data[w].genuine, o.n_per, rng, perturb);
        } else {
            values[k] = eval_params_image(duplicator_config(param), images[w].genuine, data[w].genuine, o.n_per,
                                          extractor, handle.canvas, rng);
        }
    });

    std::ostringstream table;
    table << "params,kind,mean_abs_silhouette,std_abs_silhouette\n";
    const std::array<fs::path, 2> files{o.params_a, o.params_b};
    for (std::size_t p = 0; p < 2; ++p) {
        const auto [mean, std] = mean_std(std::span<const double>(values).subspan(p * data.size(), data.size()));
        table << files[p].filename().string() << ',' << to_string(params[p]->kind) << ',' << format_double(mean)
              << ',' << format_double(std) << '\n';
    }
    std::cout << table.str();
    if (!o.out.empty()) {
        ensure_parent(o.out);
        std::ofstream csv(o.out, std::ios::binary);
        if (!csv)
            throw DataError("cannot write '" + o.out.string() + "'");
        csv << "writer,params,abs_silhouette\n";
        for (std::size_t p = 0; p < 2; ++p)
            for (std::size_t w = 0; w < data.size(); ++w)
                csv << data[w].id << ',' << (p == 0 ? 'a' : 'b') << ','
                    << format_double(values[p * data.size() + w]) << '\n';
        csv << "\n" << table.str();
        csv.close();
        write_run_record("validate-features", args, common, run_record_path(o.out, false), {o.out});
    }
}

// ---------------------------------------------------------------- make-synthetic

struct SyntheticOptions
{
    int writers = 20;
    int genuine = 24;
    int skilled = 10;
    bool with_features = false;
    fs::path out = "synthetic";
};

void run_make_synthetic(const SyntheticOptions &o, const Common &common, const std::vector<std::string> &args)
{
    SyntheticConfig config;
    config.writers = o.writers;
    config.genuine = o.genuine;
    config.skilled = o.skilled;
    config.seed = common.seed;
    config.jobs = common.jobs;
    DatasetHandle handle = write_synthetic(config, o.out);
    std::vector<fs::path> outputs{o.out / "manifest.json"};
    if (o.with_features) {
        const auto images = load_images(handle, common.jobs);
        const FeatureDataset data = extract_feature_dataset(images, baseline_extractor(), handle.canvas, common.jobs);
        VectorStore store;
        store.dimension = baseline::dimension;
        for (const auto &w : data) {
            for (Eigen::Index i = 0; i < w.genuine.cols(); ++i)
                store.records.push_back({w.id, "g" + std::to_string(i + 1), SampleLabel::genuine, w.genuine.col(i)});
            for (Eigen::Index i = 0; i < w.skilled.cols(); ++i)
                store.records.push_back(
                    {w.id, "s" + std::to_string(i + 1), SampleLabel::forgery_skilled, w.skilled.col(i)});
        }
        save_text(store, o.out / "features.txt");
        outputs.push_back(o.out / "features.txt");
        // A second manifest that reads the precomputed vectors.
        DatasetHandle features = handle;
        features.feature_store = fs::absolute(o.out / "features.txt");
        for (auto &w : features.writers) {
            w.genuine.clear();
            w.skilled.clear();
        }
        features.genuine_per_writer.reset();
        features.skilled_per_writer.reset();
        save_manifest(features, o.out / "manifest_features.json");
        outputs.push_back(o.out / "manifest_features.json");
    }
    std::cout << "wrote " << handle.writers.size() << " writers to " << o.out.string() << '\n';
    write_run_record("make-synthetic", args, common, run_record_path(o.out, true), outputs);
}

// ---------------------------------------------------------------- dispatch

int exit_code_for(const std::exception &e)
{
    if (dynamic_cast<const ConfigError *>(&e))
        return 2;
    if (dynamic_cast<const DataError *>(&e))
        return 3;
    if (dynamic_cast<const NumericalError *>(&e))
        return 4;
    return 3;
}

std::string one_line(std::string text)
{
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

int run_impl(const std::vector<std::string> &raw, bool honour_env);

int run_replay(const fs::path &record, int jobs, const fs::path &out)
{
    std::ifstream in(record, std::ios::binary);
    if (!in)
        throw DataError("cannot open run record '" + record.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception &e) {
        throw DataError("run record '" + record.string() + "': " + e.what());
    }
    if (!doc.contains("command") || !doc.contains("args"))
        throw DataError("run record '" + record.string() + "' lacks command or args");
    std::vector<std::string> args{doc["command"].get<std::string>()};
    for (const auto &a : doc["args"])
        args.push_back(a.get<std::string>());
    for (std::size_t k = 1; k + 1 < args.size(); ++k) {
        if (args[k] == "--jobs" && jobs >= 0)
            args[k + 1] = std::to_string(jobs);
        if (args[k] == "--out" && !out.empty())
            args[k + 1] = fs::absolute(out).string();
    }
    return run_impl(args, false);
}

int run_impl(const std::vector<std::string> &raw, bool honour_env)
{
    CLI::App app{"Signature variability optimization and writer-dependent verification experiments", "sigvar"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SIGVAR_VERSION);

    Common common;
    OptimizeOptions optimize_opts;
    AugmentOptions augment_opts;
    SweepOptions sweep_opts;
    EvaluateOptions evaluate_opts;
    ValidateOptions validate_opts;
    SyntheticOptions synthetic_opts;
    fs::path replay_record, replay_out;
    int replay_jobs = -1;

    std::vector<std::pair<CLI::App *, Recorder>> commands;
    auto add_command = [&](const std::string &name, const std::string &help) -> Recorder & {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->set_config("--config", "", "key=value configuration file");
        commands.emplace_back(sub, Recorder(sub));
        add_common(commands.back().second, common);
        return commands.back().second;
    };
    commands.reserve(7);

    {
        auto &rec = add_command("optimize", "Per-writer parameter optimization and the averaged vector");
        rec.option("--mode", optimize_opts.mode, "image or feature")->check(CLI::IsMember({"image", "feature"}));
        rec.option("--manifest", optimize_opts.manifest, "Dataset manifest")->required();
        rec.option("--writers", optimize_opts.writers, "Comma-separated writer ids (default: all)");
        rec.option("--iterations", optimize_opts.iterations, "Swarm iterations")->check(CLI::PositiveNumber);
        rec.option("--particles", optimize_opts.particles, "Swarm size")->check(CLI::Range(2, 100000));
        rec.option("--n-per", optimize_opts.n_per, "Synthetic samples per genuine sample")->check(CLI::PositiveNumber);
        rec.option("--perturb", optimize_opts.perturb, "Gaussian filter mode: smooth or noise");
        rec.flag("--skip-invalid", optimize_opts.skip_invalid, "Skip writers with fewer than two samples");
        rec.option("--base", optimize_opts.base, "Duplicator parameter file supplying the other duplicator values");
        rec.option("--duplicator", optimize_opts.duplicator, "External duplicator executable");
        rec.option("--out", optimize_opts.out, "Parameter file to write");
    }
    {
        auto &rec = add_command("augment", "Generate synthetic samples from a parameter file");
        rec.option("--mode", augment_opts.mode, "image or feature")->check(CLI::IsMember({"image", "feature"}));
        rec.option("--params", augment_opts.params, "Parameter file")->required();
        auto *in = app.get_subcommand("augment")->add_option("--in", augment_opts.inputs,
                                                             "PNG files or directories (image), vector stores (feature)");
        in->required();
        rec.option("--count", augment_opts.count, "Synthetic samples per input sample");
        rec.option("--perturb", augment_opts.perturb, "Gaussian filter mode: smooth or noise");
        rec.option("--out", augment_opts.out, "Output directory (image) or vector store (feature)")->required();
    }
    {
        auto &rec = add_command("sweep-sigma", "|silhouette| per writer over a grid of fixed sigma values");
        rec.option("--manifest", sweep_opts.manifest, "Dataset manifest")->required();
        rec.option("--writers", sweep_opts.writers, "Comma-separated writer ids (default: all)");
        rec.option("--sigma-grid", sweep_opts.grid, "start:stop:step");
        rec.option("--n-per", sweep_opts.n_per, "Synthetic samples per genuine sample")->check(CLI::PositiveNumber);
        rec.option("--perturb", sweep_opts.perturb, "Gaussian filter mode: smooth or noise");
        rec.option("--out", sweep_opts.out, "CSV to write (an SVG is written alongside)");
    }
    {
        auto &rec = add_command("evaluate", "Repeated writer-dependent verification protocol");
        rec.option("--manifest", evaluate_opts.manifest, "Dataset manifest")->required();
        rec.option("--params", evaluate_opts.params, "Parameter file for synthetic samples");
        rec.option("--r", evaluate_opts.r, "Training genuine samples per writer, e.g. 1..3");
        rec.option("--d", evaluate_opts.d, "Synthetic samples per training sample, e.g. 0..22");
        rec.option("--reps", evaluate_opts.reps, "Repetitions")->check(CLI::PositiveNumber);
        rec.option("--preset", evaluate_opts.preset, "Split preset: gpds, mcyt, cedar, small or auto");
        rec.option("--random-per-writer", evaluate_opts.random_per_writer, "Training random forgeries per writer");
        rec.option("--random-writers", evaluate_opts.random_writers, "Writers contributing random forgeries (0: all)");
        rec.option("--test-genuine", evaluate_opts.test_genuine, "Test genuine samples per writer");
        rec.option("--test-random", evaluate_opts.test_random, "Test random forgeries per writer");
        rec.option("--test-skilled", evaluate_opts.test_skilled, "Test skilled forgeries per writer");
        rec.option("--gamma", evaluate_opts.gamma, "RBF gamma; 0 picks 1 / (dimension * variance)");
        rec.flag("--no-augment-negatives", evaluate_opts.no_augment_negatives,
                 "Do not add synthetic samples to the random forgeries");
        rec.option("--perturb", evaluate_opts.perturb, "Gaussian filter mode: smooth or noise");
        rec.option("--out", evaluate_opts.out, "Report directory");
    }
    {
        auto &rec = add_command("validate-features", "Compare two parameter files by mean |silhouette|");
        rec.option("--manifest", validate_opts.manifest, "Dataset manifest")->required();
        rec.option("--writers", validate_opts.writers, "Comma-separated writer ids (default: all)");
        rec.option("--params-a", validate_opts.params_a, "First parameter file")->required();
        rec.option("--params-b", validate_opts.params_b, "Second parameter file")->required();
        rec.option("--n-per", validate_opts.n_per, "Synthetic samples per genuine sample")->check(CLI::PositiveNumber);
        rec.option("--perturb", validate_opts.perturb, "Gaussian filter mode: smooth or noise");
        rec.option("--out", validate_opts.out, "Optional per-writer CSV");
    }
    {
        auto &rec = add_command("make-synthetic", "Write the bundled synthetic signature dataset");
        rec.option("--writers", synthetic_opts.writers, "Writers")->check(CLI::PositiveNumber);
        rec.option("--genuine", synthetic_opts.genuine, "Genuine signatures per writer");
        rec.option("--skilled", synthetic_opts.skilled, "Skilled forgeries per writer");
        rec.flag("--with-features", synthetic_opts.with_features, "Also write extracted feature vectors");
        rec.option("--out", synthetic_opts.out, "Output directory");
    }
    CLI::App *replay = app.add_subcommand("replay", "Re-run a recorded run.json");
    replay->add_option("record", replay_record, "run.json to replay")->required();
    replay->add_option("--jobs", replay_jobs, "Override the worker count");
    replay->add_option("--out", replay_out, "Override the output location");

    std::vector<std::string> reversed(raw.rbegin(), raw.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "sigvar: error: " << one_line(e.what()) << '\n';
        return 2;
    }

    if (replay->parsed())
        return run_replay(replay_record, replay_jobs, replay_out);

    if (honour_env)
        if (const char *env = std::getenv("SIGVAR_SEED"); env && *env) {
            std::uint64_t seed = 0;
            const std::string_view text(env);
            const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
            if (ec != std::errc() || end != text.data() + text.size())
                throw ConfigError("SIGVAR_SEED must be an unsigned integer, got '" + std::string(text) + "'");
            common.seed = seed;
        }

    for (auto &[sub, rec] : commands) {
        if (!sub->parsed())
            continue;
        const std::string name = sub->get_name();
        const std::vector<std::string> args = rec.arguments();
        if (name == "optimize")
            run_optimize(optimize_opts, common, args);
        else if (name == "augment") {
            std::vector<std::string> full = args;
            for (const auto &in : augment_opts.inputs) {
                full.push_back("--in");
                full.push_back(fs::absolute(in).string());
            }
            run_augment(augment_opts, common, full);
        } else if (name == "sweep-sigma")
            run_sweep(sweep_opts, common, args);
        else if (name == "evaluate")
            run_evaluate(evaluate_opts, common, args);
        else if (name == "validate-features")
            run_validate(validate_opts, common, args);
        else if (name == "make-synthetic")
            run_make_synthetic(synthetic_opts, common, args);
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string> &args)
{
    try {
        return run_impl(args, true);
    } catch (const Error &e) {
        std::cerr << "sigvar: error: " << one_line(e.what()) << '\n';
        return exit_code_for(e);
    } catch (const std::exception &e) {
        std::cerr << "sigvar: error: " << one_line(e.what()) << '\n';
        return 3;
    }
}

} // namespace sigvar::cli
