#include "sigvar/orchestrate.hpp"

#include "sigvar/error.hpp"
#include "sigvar/parallel.hpp"
#include "sigvar/preprocess.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace sigvar {

std::string_view to_string(PipelineMode mode)
{
    return mode == PipelineMode::image ? "image" : "feature";
}

PipelineMode parse_pipeline_mode(std::string_view text)
{
    if (text == "image")
        return PipelineMode::image;
    if (text == "feature")
        return PipelineMode::feature;
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected image or feature)");
}

ParameterKind parameter_kind(PipelineMode mode)
{
    return mode == PipelineMode::image ? ParameterKind::duplicator : ParameterKind::gaussian;
}

std::size_t WriterSet::sample_count(PipelineMode mode) const
{
    return mode == PipelineMode::image ? images.size() : static_cast<std::size_t>(features.cols());
}

ParameterVector average_parameters(std::span<const ParameterVector> vectors)
{
    if (vectors.empty())
        throw ConfigError("average_parameters: no vectors");
    ParameterVector mean{vectors.front().kind, Eigen::VectorXd::Zero(vectors.front().size())};
    for (const auto &v : vectors) {
        if (v.kind != mean.kind || v.size() != mean.size())
            throw ConfigError("average_parameters: mixed parameter kinds");
        mean.values += v.values;
    }
    mean.values /= static_cast<double>(vectors.size());
    return mean;
}

std::uint64_t writer_seed(std::uint64_t master, std::string_view writer_id)
{
    return derive_seed(master, {0x5167, hash_string(writer_id)});
}

std::string config_fingerprint(const SigvarConfig &config)
{
    std::ostringstream text;
    text << "mode=" << to_string(config.mode) << ";n_per=" << config.n_per << ";iterations=" << config.iterations
         << ";particles=" << config.particles << ";seed=" << config.seed << ";perturb=" << to_string(config.perturb)
         << ";canvas=" << config.canvas.height << 'x' << config.canvas.width;
    if (config.mode == PipelineMode::image) {
        text << ';' << format_duplicator_parameters(config.duplicator);
        if (config.duplicator.external_executable)
            text << ";external=" << config.duplicator.external_executable->string();
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash_string(text.str())));
    return hex;
}

Fitness writer_fitness(const WriterSet &writer, const SigvarConfig &config)
{
    if (config.n_per < 1)
        throw ConfigError("n_per must be at least 1");
    if (config.mode == PipelineMode::feature) {
        const FeatureMatrix genuine = writer.features;
        const PerturbMode perturb = config.perturb;
        const int n_per = config.n_per;
        return [genuine, perturb, n_per](const ParameterVector &params, std::uint64_t seed) {
            Rng rng(seed);
            return eval_params_feature(params, genuine, n_per, rng, perturb);
        };
    }
    const auto images = std::make_shared<const std::vector<SignatureImage>>(writer.images);
    const auto features =
        std::make_shared<const FeatureMatrix>(extract_all(*images, config.extractor, config.canvas));
    const DuplicatorConfig base = config.duplicator;
    const Extractor extractor = config.extractor;
    const CanvasSize canvas = config.canvas;
    const int n_per = config.n_per;
    return [images, features, base, extractor, canvas, n_per](const ParameterVector &params, std::uint64_t seed) {
        DuplicatorConfig duplicator = base;
        duplicator.variability = params;
        Rng rng(seed);
        return eval_params_image(duplicator, *images, *features, n_per, extractor, canvas, rng);
    };
}

OptimizationResult sigvar_optimize(std::span<const WriterSet> writers, const SigvarConfig &config)
{
    if (writers.empty())
        throw ConfigError("sigvar_optimize: no writers");
    OptimizationResult result;
    result.kind = parameter_kind(config.mode);
    result.seed = config.seed;
    result.config_fingerprint = config_fingerprint(config);
    if (config.mode == PipelineMode::image)
        result.passthrough = config.duplicator.passthrough;

    for (const auto &writer : writers) {
        if (writer.sample_count(config.mode) < 2) {
            const std::string message = "writer '" + writer.id + "' has fewer than two genuine samples";
            if (!config.skip_invalid)
                throw DataError(message);
            std::cerr << "warning: skipping " << message << '\n';
            result.skipped.push_back(writer.id);
            continue;
        }
        SwarmConfig swarm;
        swarm.iterations = config.iterations;
        swarm.particles = config.particles;
        swarm.seed = writer_seed(config.seed, writer.id);
        swarm.jobs = config.jobs;
        SwarmResult found = optimize(writer_fitness(writer, config), result.kind, swarm);
        result.per_writer.push_back(
            {writer.id, std::move(found.best), found.best_fitness, std::move(found.trace), swarm.seed});
    }
    if (result.per_writer.empty())
        throw DataError("sigvar_optimize: every writer was skipped");

    std::vector<ParameterVector> bests;
    for (const auto &w : result.per_writer)
        bests.push_back(w.best);
    result.average = average_parameters(bests);
    return result;
}

namespace {

using nlohmann::json;

json vector_json(const ParameterVector &v)
{
    json out = json::object();
    const auto names = parameter_names(v.kind);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[std::string(names[static_cast<std::size_t>(i)])] = v[i];
    return out;
}

ParameterVector vector_from_json(const json &node, ParameterKind kind, const std::string &where)
{
    if (!node.is_object())
        throw DataError(where + ": expected an object of named parameters");
    const auto names = parameter_names(kind);
    ParameterVector v{kind, Eigen::VectorXd(static_cast<Eigen::Index>(names.size()))};
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string name(names[i]);
        if (!node.contains(name) || !node[name].is_number())
            throw DataError(where + ": missing numeric '" + name + "'");
        v.values[static_cast<Eigen::Index>(i)] = node[name].get<double>();
    }
    for (const auto &[key, _] : node.items()) {
        bool known = false;
        for (auto name : names)
            known = known || key == name;
        if (!known)
            throw DataError(where + ": unknown parameter '" + key + "'");
    }
    return v;
}

} // namespace

void save_parameters(const OptimizationResult &result, const std::filesystem::path &path)
{
    json doc;
    doc["schema_version"] = parameter_schema_version;
    doc["kind"] = std::string(to_string(result.kind));
    doc["average"] = vector_json(result.average);
    if (!result.passthrough.empty()) {
        json extra = json::object();
        for (const auto &[k, v] : result.passthrough)
            extra[k] = v;
        doc["passthrough"] = extra;
    }
    doc["seed"] = result.seed;
    doc["config_fingerprint"] = result.config_fingerprint;
    doc["skipped"] = result.skipped;
    doc["writers"] = json::array();
    for (const auto &w : result.per_writer) {
        json trace = json::array();
        for (const auto &t : w.trace)
            trace.push_back({t.iteration, t.iteration_best, t.global_best});
        doc["writers"].push_back({{"id", w.writer_id},
                                  {"parameters", vector_json(w.best)},
                                  {"abs_silhouette", w.abs_silhouette},
                                  {"seed", w.seed},
                                  {"trace", trace}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write parameter file '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

OptimizationResult load_parameters(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open parameter file '" + path.string() + "'");
    const std::string where = "parameter file '" + path.string() + "'";
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception &e) {
        throw DataError(where + ": " + e.what());
    }
    try {
        if (!doc.is_object() || !doc.contains("schema_version"))
            throw DataError(where + ": missing schema_version");
        const int version = doc["schema_version"].get<int>();
        if (version > parameter_schema_version)
            throw DataError(where + ": schema version " + std::to_string(version) + " is newer than supported version "
                            + std::to_string(parameter_schema_version));
        if (version < 1)
            throw DataError(where + ": invalid schema version " + std::to_string(version));

        OptimizationResult result;
        result.kind = parse_parameter_kind(doc.at("kind").get<std::string>());
        result.average = vector_from_json(doc.at("average"), result.kind, where + " average");
        validate(result.average);
        if (doc.contains("passthrough"))
            for (const auto &[k, v] : doc["passthrough"].items())
                result.passthrough[k] = v.get<double>();
        result.seed = doc.value("seed", std::uint64_t{0});
        result.config_fingerprint = doc.value("config_fingerprint", std::string());
        if (doc.contains("skipped"))
            result.skipped = doc["skipped"].get<std::vector<std::string>>();
        if (doc.contains("writers"))
            for (const auto &node : doc["writers"]) {
                WriterOptimum w;
                w.writer_id = node.at("id").get<std::string>();
                w.best = vector_from_json(node.at("parameters"), result.kind, where + " writer '" + w.writer_id + "'");
                w.abs_silhouette = node.at("abs_silhouette").get<double>();
                w.seed = node.at("seed").get<std::uint64_t>();
                for (const auto &t : node.at("trace"))
                    w.trace.push_back({t.at(0).get<int>(), t.at(1).get<double>(), t.at(2).get<double>()});
                result.per_writer.push_back(std::move(w));
            }
        return result;
    } catch (const json::exception &e) {
        throw DataError(where + ": " + e.what());
    } catch (const ConfigError &e) {
        throw DataError(where + ": " + e.what());
    }
}

DuplicatorConfig duplicator_config(const OptimizationResult &result)
{
    if (result.kind != ParameterKind::duplicator)
        throw ConfigError("parameter file holds gaussian parameters, duplicator parameters expected");
    DuplicatorConfig config;
    config.variability = result.average;
    for (const auto &[k, v] : result.passthrough)
        config.passthrough[k] = v;
    return config;
}

std::vector<WriterImages> load_images(const DatasetHandle &handle, int jobs)
{
    struct Job
    {
        std::size_t writer;
        bool skilled;
        std::size_t index;
    };
    std::vector<WriterImages> out(handle.writers.size());
    std::vector<Job> jobs_list;
    for (std::size_t w = 0; w < handle.writers.size(); ++w) {
        out[w].id = handle.writers[w].id;
        out[w].genuine.resize(handle.writers[w].genuine.size());
        out[w].skilled.resize(handle.writers[w].skilled.size());
        for (std::size_t i = 0; i < out[w].genuine.size(); ++i)
            jobs_list.push_back({w, false, i});
        for (std::size_t i = 0; i < out[w].skilled.size(); ++i)
            jobs_list.push_back({w, true, i});
    }
    parallel_for(jobs_list.size(), jobs, [&](std::size_t k) {
        const Job &job = jobs_list[k];
        const auto &entry = handle.writers[job.writer];
        if (job.skilled)
            out[job.writer].skilled[job.index] = read_png(entry.skilled[job.index]);
        else
            out[job.writer].genuine[job.index] = read_png(entry.genuine[job.index]);
    });
    return out;
}

FeatureDataset extract_feature_dataset(const std::vector<WriterImages> &images, const Extractor &extractor,
                                       CanvasSize canvas, int jobs)
{
    struct Job
    {
        std::size_t writer;
        bool skilled;
        std::size_t index;
    };
    std::vector<Job> jobs_list;
    for (std::size_t w = 0; w < images.size(); ++w) {
        for (std::size_t i = 0; i < images[w].genuine.size(); ++i)
            jobs_list.push_back({w, false, i});
        for (std::size_t i = 0; i < images[w].skilled.size(); ++i)
            jobs_list.push_back({w, true, i});
    }
    std::vector<FeatureVector> vectors(jobs_list.size());
    parallel_for(jobs_list.size(), jobs, [&](std::size_t k) {
        const Job &job = jobs_list[k];
        const auto &source = job.skilled ? images[job.writer].skilled : images[job.writer].genuine;
        vectors[k] = extractor(normalize_signature(source[job.index], canvas));
    });

    FeatureDataset data(images.size());
    const Eigen::Index dim = vectors.empty() ? 0 : vectors.front().size();
    for (std::size_t w = 0; w < images.size(); ++w) {
        data[w].id = images[w].id;
        data[w].genuine.resize(dim, static_cast<Eigen::Index>(images[w].genuine.size()));
        data[w].skilled.resize(dim, static_cast<Eigen::Index>(images[w].skilled.size()));
    }
    for (std::size_t k = 0; k < jobs_list.size(); ++k) {
        const Job &job = jobs_list[k];
        auto &target = job.skilled ? data[job.writer].skilled : data[job.writer].genuine;
        target.col(static_cast<Eigen::Index>(job.index)) = vectors[k];
    }
    return data;
}

FeatureDataset load_feature_dataset(const DatasetHandle &handle, const Extractor &extractor, int jobs)
{
    if (!handle.feature_store)
        return extract_feature_dataset(load_images(handle, jobs), extractor, handle.canvas, jobs);

    const VectorStore store = load_precomputed(*handle.feature_store);
    auto genuine = group_by_writer(store, SampleLabel::genuine);
    auto skilled = group_by_writer(store, SampleLabel::forgery_skilled);
    FeatureDataset data;
    std::vector<std::string> ids;
    for (const auto &w : handle.writers)
        ids.push_back(w.id);
    if (ids.empty())
        for (const auto &[id, _] : genuine)
            ids.push_back(id);
    for (const auto &id : ids) {
        const auto g = genuine.find(id);
        if (g == genuine.end())
            throw DataError("feature store '" + handle.feature_store->string() + "' has no genuine vectors for writer '"
                            + id + "'");
        WriterFeatures w;
        w.id = id;
        w.genuine = g->second;
        if (const auto s = skilled.find(id); s != skilled.end())
            w.skilled = s->second;
        else
            w.skilled.resize(static_cast<Eigen::Index>(store.dimension), 0);
        data.push_back(std::move(w));
    }
    return data;
}

SampleAugmenter image_augmenter(std::shared_ptr<const std::vector<WriterImages>> images,
                                const DuplicatorConfig &config, const Extractor &extractor, CanvasSize canvas)
{
    validate(config.variability);
    return [images, config, extractor, canvas](const SampleRef &sample, const FeatureVector &, int count,
                                               std::uint64_t seed) {
        const auto &source = images->at(sample.writer).genuine.at(sample.index);
        Rng rng(seed);
        const auto duplicates = duplicate(source, config, count, rng);
        return extract_all(duplicates, extractor, canvas);
    };
}

} // namespace sigvar
