#include "sigvar/features.hpp"

#include "sigvar/error.hpp"
#include "sigvar/preprocess.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sigvar {

FeatureVector extract(const SignatureImage &normalized)
{
    using namespace baseline;
    if (normalized.height() != normalized_height || normalized.width() != normalized_width)
        throw DataError("extract: expected a 150x220 image, got " + std::to_string(normalized.height()) + "x"
                        + std::to_string(normalized.width()));

    // Ink is bright after normalization; accept ink-dark input by flipping.
    const bool dark = normalized.polarity == Polarity::ink_dark;
    FeatureVector features(dimension);
    const double cell_pixels = static_cast<double>(cell_height * cell_width);
    Eigen::Index at = 0;
    for (Eigen::Index gr = 0; gr < grid_rows; ++gr) {
        for (Eigen::Index gc = 0; gc < grid_cols; ++gc) {
            double sum = 0.0, sum_sq = 0.0, ink = 0.0, mass_r = 0.0, mass_c = 0.0;
            for (Eigen::Index r = 0; r < cell_height; ++r)
                for (Eigen::Index c = 0; c < cell_width; ++c) {
                    const std::uint8_t raw = normalized.pixels(gr * cell_height + r, gc * cell_width + c);
                    const double v = (dark ? 255.0 - raw : static_cast<double>(raw)) / 255.0;
                    sum += v;
                    sum_sq += v * v;
                    ink += v > 0.0 ? 1.0 : 0.0;
                    mass_r += v * static_cast<double>(r);
                    mass_c += v * static_cast<double>(c);
                }
            const double mean = sum / cell_pixels;
            const double variance = std::max(0.0, sum_sq / cell_pixels - mean * mean);
            double offset_x = 0.0, offset_y = 0.0;
            if (sum > 0.0) {
                offset_x = (mass_c / sum - (static_cast<double>(cell_width) - 1.0) / 2.0) / static_cast<double>(cell_width);
                offset_y = (mass_r / sum - (static_cast<double>(cell_height) - 1.0) / 2.0) / static_cast<double>(cell_height);
            }
            features[at++] = mean;
            features[at++] = std::sqrt(variance);
            features[at++] = ink / cell_pixels;
            features[at++] = offset_x;
            features[at++] = offset_y;
        }
    }
    return features;
}

Extractor baseline_extractor()
{
    return [](const SignatureImage &image) { return extract(image); };
}

std::string_view to_string(SampleLabel label)
{
    switch (label) {
    case SampleLabel::genuine:
        return "genuine";
    case SampleLabel::forgery_skilled:
        return "forgery_skilled";
    case SampleLabel::forgery_random:
        return "forgery_random";
    }
    return "genuine";
}

SampleLabel parse_sample_label(std::string_view text)
{
    if (text == "genuine")
        return SampleLabel::genuine;
    if (text == "forgery_skilled")
        return SampleLabel::forgery_skilled;
    if (text == "forgery_random")
        return SampleLabel::forgery_random;
    throw DataError("unknown sample label '" + std::string(text) + "'");
}

std::string format_double(double value)
{
    std::array<char, 64> buffer;
    const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc())
        throw NumericalError("cannot format value");
    return std::string(buffer.data(), end);
}

namespace {

constexpr char binary_magic[4] = {'S', 'V', 'F', 'V'};

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

[[noreturn]] void fail(const std::filesystem::path &path, std::size_t line, const std::string &what)
{
    throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

VectorStore load_text(std::istream &in, const std::filesystem::path &path)
{
    VectorStore store;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (!have_header) {
            if (line.rfind("dim=", 0) != 0)
                fail(path, line_no, "missing 'dim=<D>' header");
            const std::string_view digits = std::string_view(line).substr(4);
            long long dim = 0;
            const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
            if (ec != std::errc() || p != digits.data() + digits.size() || dim < 1)
                fail(path, line_no, "invalid dimension in header");
            store.dimension = static_cast<Eigen::Index>(dim);
            have_header = true;
            continue;
        }
        const auto fields = split_commas(line);
        if (fields.size() != static_cast<std::size_t>(store.dimension) + 3)
            fail(path, line_no,
                 "record has " + std::to_string(fields.size() >= 3 ? fields.size() - 3 : 0) + " values, expected "
                     + std::to_string(store.dimension));
        VectorRecord record;
        record.writer = std::string(fields[0]);
        record.sample = std::string(fields[1]);
        try {
            record.label = parse_sample_label(fields[2]);
        } catch (const DataError &e) {
            fail(path, line_no, e.what());
        }
        record.values.resize(store.dimension);
        for (Eigen::Index k = 0; k < store.dimension; ++k) {
            const std::string_view text = fields[static_cast<std::size_t>(k) + 3];
            double value = 0.0;
            const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || p != text.data() + text.size())
                fail(path, line_no, "cannot parse value " + std::to_string(k + 1));
            if (!std::isfinite(value))
                fail(path, line_no, "non-finite value " + std::to_string(k + 1));
            record.values[k] = value;
        }
        store.records.push_back(std::move(record));
    }
    if (!have_header)
        fail(path, line_no, "empty vector store");
    return store;
}

template<class T>
void put(std::ostream &out, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template<class T>
bool get(std::istream &in, T &value)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char *>(bytes), sizeof(T)))
        return false;
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
    return true;
}

std::uint32_t numeric_id(const std::string &text, const char *what)
{
    std::uint32_t value = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || p != text.data() + text.size() || text.empty())
        throw DataError(std::string("binary store needs numeric ") + what + " ids, got '" + text + "'");
    return value;
}

VectorStore load_binary(std::istream &in, const std::filesystem::path &path)
{
    VectorStore store;
    std::uint32_t dim = 0, count = 0;
    if (!get(in, dim) || !get(in, count) || dim == 0)
        fail(path, 0, "truncated binary header");
    store.dimension = dim;
    store.records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t writer = 0, sample = 0, label = 0;
        if (!get(in, writer) || !get(in, sample) || !get(in, label))
            fail(path, i + 1, "truncated record header");
        if (label > 2)
            fail(path, i + 1, "invalid label code " + std::to_string(label));
        VectorRecord record{std::to_string(writer), std::to_string(sample), static_cast<SampleLabel>(label),
                            FeatureVector(dim)};
        for (std::uint32_t k = 0; k < dim; ++k) {
            double v = 0.0;
            if (!get(in, v))
                fail(path, i + 1, "truncated record values");
            if (!std::isfinite(v))
                fail(path, i + 1, "non-finite value " + std::to_string(k + 1));
            record.values[k] = v;
        }
        store.records.push_back(std::move(record));
    }
    return store;
}

} // namespace

VectorStore load_precomputed(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open vector store '" + path.string() + "'");
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, binary_magic, 4) == 0)
        return load_binary(in, path);
    in.clear();
    in.seekg(0);
    return load_text(in, path);
}

void save_text(const VectorStore &store, const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write vector store '" + path.string() + "'");
    out << "dim=" << store.dimension << '\n';
    for (const auto &r : store.records) {
        if (r.values.size() != store.dimension)
            throw DataError("record " + r.writer + "/" + r.sample + " has dimension "
                            + std::to_string(r.values.size()));
        out << r.writer << ',' << r.sample << ',' << to_string(r.label);
        for (Eigen::Index k = 0; k < r.values.size(); ++k)
            out << ',' << format_double(r.values[k]);
        out << '\n';
    }
}

void save_binary(const VectorStore &store, const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write vector store '" + path.string() + "'");
    out.write(binary_magic, 4);
    put(out, static_cast<std::uint32_t>(store.dimension));
    put(out, static_cast<std::uint32_t>(store.records.size()));
    for (const auto &r : store.records) {
        if (r.values.size() != store.dimension)
            throw DataError("record " + r.writer + "/" + r.sample + " has dimension "
                            + std::to_string(r.values.size()));
        put(out, numeric_id(r.writer, "writer"));
        put(out, numeric_id(r.sample, "sample"));
        put(out, static_cast<std::uint32_t>(r.label));
        for (Eigen::Index k = 0; k < r.values.size(); ++k)
            put(out, r.values[k]);
    }
}

std::map<std::string, FeatureMatrix> group_by_writer(const VectorStore &store, SampleLabel label)
{
    std::map<std::string, std::vector<const FeatureVector *>> columns;
    for (const auto &r : store.records)
        if (r.label == label)
            columns[r.writer].push_back(&r.values);
    std::map<std::string, FeatureMatrix> grouped;
    for (const auto &[writer, cols] : columns) {
        FeatureMatrix m(store.dimension, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j)
            m.col(static_cast<Eigen::Index>(j)) = *cols[j];
        grouped.emplace(writer, std::move(m));
    }
    return grouped;
}

} // namespace sigvar
