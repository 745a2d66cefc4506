#include "sigvar/ingest.hpp"

#include "sigvar/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace sigvar {

using nlohmann::json;

std::optional<CanvasSize> default_canvas(std::string_view dataset_name)
{
    std::string lower(dataset_name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.rfind("gpds", 0) == 0)
        return gpds_canvas;
    if (lower.rfind("cedar", 0) == 0)
        return cedar_canvas;
    if (lower.rfind("mcyt", 0) == 0)
        return mcyt_canvas;
    return std::nullopt;
}

namespace {

std::vector<std::filesystem::path> read_paths(const json &list, const std::filesystem::path &root,
                                              const std::string &writer, const char *field)
{
    std::vector<std::filesystem::path> paths;
    if (list.is_null())
        return paths;
    if (!list.is_array())
        throw DataError("manifest: writer '" + writer + "' field '" + field + "' must be an array");
    for (const auto &item : list) {
        std::filesystem::path p = item.get<std::string>();
        if (p.is_relative())
            p = root / p;
        if (!std::filesystem::exists(p))
            throw DataError("manifest: writer '" + writer + "' references missing file '" + p.string() + "'");
        paths.push_back(std::move(p));
    }
    return paths;
}

} // namespace

DatasetHandle load_manifest(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open manifest '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception &e) {
        throw DataError("manifest '" + path.string() + "': " + e.what());
    }
    const std::filesystem::path root = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    DatasetHandle handle;
    try {
        handle.name = doc.value("name", std::string("dataset"));
        if (doc.contains("canvas")) {
            const auto &canvas = doc.at("canvas");
            if (!canvas.is_array() || canvas.size() != 2)
                throw DataError("manifest: 'canvas' must be [height, width]");
            handle.canvas = {canvas[0].get<Eigen::Index>(), canvas[1].get<Eigen::Index>()};
            if (handle.canvas.height <= 0 || handle.canvas.width <= 0)
                throw DataError("manifest: canvas must be positive");
        } else if (auto c = default_canvas(handle.name)) {
            handle.canvas = *c;
        }
        if (doc.contains("genuine_per_writer"))
            handle.genuine_per_writer = doc.at("genuine_per_writer").get<std::size_t>();
        if (doc.contains("skilled_per_writer"))
            handle.skilled_per_writer = doc.at("skilled_per_writer").get<std::size_t>();
        if (doc.contains("features")) {
            std::filesystem::path store = doc.at("features").get<std::string>();
            if (store.is_relative())
                store = root / store;
            if (!std::filesystem::exists(store))
                throw DataError("manifest: feature store '" + store.string() + "' is missing");
            handle.feature_store = store;
        }

        std::set<std::string> seen;
        for (const auto &w : doc.at("writers")) {
            WriterEntry entry;
            entry.id = w.at("id").is_string() ? w.at("id").get<std::string>() : w.at("id").dump();
            if (!seen.insert(entry.id).second)
                throw DataError("manifest: duplicate writer id '" + entry.id + "'");
            entry.genuine = read_paths(w.value("genuine", json()), root, entry.id, "genuine");
            entry.skilled = read_paths(w.value("skilled", json()), root, entry.id, "skilled");
            if (handle.genuine_per_writer && entry.genuine.size() != *handle.genuine_per_writer && !handle.feature_store)
                throw DataError("manifest: writer '" + entry.id + "' lists " + std::to_string(entry.genuine.size())
                                + " genuine files, declared " + std::to_string(*handle.genuine_per_writer));
            if (handle.skilled_per_writer && entry.skilled.size() != *handle.skilled_per_writer && !handle.feature_store)
                throw DataError("manifest: writer '" + entry.id + "' lists " + std::to_string(entry.skilled.size())
                                + " skilled files, declared " + std::to_string(*handle.skilled_per_writer));
            handle.writers.push_back(std::move(entry));
        }
    } catch (const json::exception &e) {
        throw DataError("manifest '" + path.string() + "': " + e.what());
    }
    if (handle.writers.empty())
        throw DataError("manifest '" + path.string() + "' lists no writers");
    return handle;
}

void save_manifest(const DatasetHandle &handle, const std::filesystem::path &path)
{
    const std::filesystem::path root = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto relative = [&](const std::filesystem::path &p) {
        std::error_code ec;
        auto rel = std::filesystem::relative(p, root, ec);
        return (ec || rel.empty()) ? p.generic_string() : rel.generic_string();
    };
    json doc;
    doc["name"] = handle.name;
    doc["canvas"] = {handle.canvas.height, handle.canvas.width};
    if (handle.genuine_per_writer)
        doc["genuine_per_writer"] = *handle.genuine_per_writer;
    if (handle.skilled_per_writer)
        doc["skilled_per_writer"] = *handle.skilled_per_writer;
    if (handle.feature_store)
        doc["features"] = relative(*handle.feature_store);
    doc["writers"] = json::array();
    for (const auto &w : handle.writers) {
        json entry;
        entry["id"] = w.id;
        entry["genuine"] = json::array();
        entry["skilled"] = json::array();
        for (const auto &p : w.genuine)
            entry["genuine"].push_back(relative(p));
        for (const auto &p : w.skilled)
            entry["skilled"].push_back(relative(p));
        doc["writers"].push_back(std::move(entry));
    }
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write manifest '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

std::vector<WriterCounts> writer_counts(const DatasetHandle &handle)
{
    std::vector<WriterCounts> counts;
    counts.reserve(handle.writers.size());
    for (const auto &w : handle.writers)
        counts.push_back({w.genuine.size(), w.skilled.size()});
    return counts;
}

SplitConfig SplitConfig::gpds(std::size_t r)
{
    return {r, 14, 0, 10, 10, 10};
}

SplitConfig SplitConfig::mcyt(std::size_t r)
{
    return {r, 10, 0, 5, 0, 15};
}

SplitConfig SplitConfig::cedar(std::size_t r)
{
    return {r, 12, 0, 10, 0, 10};
}

std::vector<WriterSplit> split(const std::vector<WriterCounts> &writers, const SplitConfig &config, Rng &rng)
{
    const std::size_t count = writers.size();
    if (count < 2)
        throw DataError("split: at least two writers are required for random forgeries");
    if (config.train_genuine < 1)
        throw ConfigError("split: at least one training genuine signature is required");
    for (std::size_t w = 0; w < count; ++w) {
        const auto &c = writers[w];
        if (c.genuine < config.train_genuine + config.test_genuine)
            throw DataError("split: writer #" + std::to_string(w) + " has " + std::to_string(c.genuine)
                            + " genuine samples, needs " + std::to_string(config.train_genuine + config.test_genuine));
        if (c.skilled < config.test_skilled)
            throw DataError("split: writer #" + std::to_string(w) + " has " + std::to_string(c.skilled)
                            + " skilled forgeries, needs " + std::to_string(config.test_skilled));
        if (c.genuine < config.random_per_writer)
            throw DataError("split: writer #" + std::to_string(w) + " has " + std::to_string(c.genuine)
                            + " genuine samples, cannot supply " + std::to_string(config.random_per_writer)
                            + " random forgeries");
    }
    const std::size_t contributors = config.random_writers == 0 ? count - 1 : config.random_writers;
    if (contributors > count - 1)
        throw DataError("split: " + std::to_string(contributors) + " random-forgery writers requested, only "
                        + std::to_string(count - 1) + " available");

    std::vector<WriterSplit> out(count);
    for (std::size_t w = 0; w < count; ++w) {
        WriterSplit &s = out[w];
        std::vector<std::size_t> order(writers[w].genuine);
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        rng.shuffle(order);
        s.train_genuine.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.train_genuine));
        s.test_genuine.assign(order.end() - static_cast<std::ptrdiff_t>(config.test_genuine), order.end());
        s.test_skilled = rng.sample_without_replacement(writers[w].skilled, config.test_skilled);

        std::vector<std::size_t> others;
        for (std::size_t v = 0; v < count; ++v)
            if (v != w)
                others.push_back(v);
        std::vector<std::size_t> chosen;
        for (std::size_t k : rng.sample_without_replacement(others.size(), contributors))
            chosen.push_back(others[k]);
        std::sort(chosen.begin(), chosen.end());
        std::set<SampleRef> used;
        for (std::size_t v : chosen)
            for (std::size_t idx : rng.sample_without_replacement(writers[v].genuine, config.random_per_writer)) {
                s.train_random.push_back({v, idx});
                used.insert({v, idx});
            }

        if (config.test_random > 0) {
            std::vector<SampleRef> pool;
            for (std::size_t v : others)
                for (std::size_t idx = 0; idx < writers[v].genuine; ++idx)
                    if (!used.contains({v, idx}))
                        pool.push_back({v, idx});
            if (pool.size() < config.test_random)
                throw DataError("split: writer #" + std::to_string(w) + " lacks unused samples for "
                                + std::to_string(config.test_random) + " random test forgeries");
            for (std::size_t k : rng.sample_without_replacement(pool.size(), config.test_random))
                s.test_random.push_back(pool[k]);
        }
    }
    return out;
}

std::vector<WriterSplit> split(const DatasetHandle &handle, const SplitConfig &config, Rng &rng)
{
    return split(writer_counts(handle), config, rng);
}

} // namespace sigvar
