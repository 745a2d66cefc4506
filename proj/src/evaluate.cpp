#include "sigvar/evaluate.hpp"

#include "sigvar/error.hpp"
#include "sigvar/features.hpp"
#include "sigvar/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace sigvar {

ErrorRates error_rates_at(std::span<const double> genuine_sorted, std::span<const double> forgery_sorted,
                          double threshold)
{
    const auto g_lo = std::lower_bound(genuine_sorted.begin(), genuine_sorted.end(), threshold);
    const auto g_hi = std::upper_bound(g_lo, genuine_sorted.end(), threshold);
    const auto f_lo = std::lower_bound(forgery_sorted.begin(), forgery_sorted.end(), threshold);
    const auto f_hi = std::upper_bound(f_lo, forgery_sorted.end(), threshold);

    const double g_below = static_cast<double>(g_lo - genuine_sorted.begin());
    const double g_equal = static_cast<double>(g_hi - g_lo);
    const double f_above = static_cast<double>(forgery_sorted.end() - f_hi);
    const double f_equal = static_cast<double>(f_hi - f_lo);

    ErrorRates rates;
    rates.frr = (g_below + 0.5 * g_equal) / static_cast<double>(genuine_sorted.size());
    rates.far = (f_above + 0.5 * f_equal) / static_cast<double>(forgery_sorted.size());
    return rates;
}

EerResult compute_eer(std::span<const double> genuine, std::span<const double> forgery)
{
    if (genuine.empty() || forgery.empty())
        throw ConfigError("compute_eer: both score sets must be non-empty");
    std::vector<double> g(genuine.begin(), genuine.end());
    std::vector<double> f(forgery.begin(), forgery.end());
    for (double s : g)
        if (std::isnan(s))
            throw NumericalError("compute_eer: NaN genuine score");
    for (double s : f)
        if (std::isnan(s))
            throw NumericalError("compute_eer: NaN forgery score");
    std::sort(g.begin(), g.end());
    std::sort(f.begin(), f.end());

    std::vector<double> pooled;
    pooled.reserve(g.size() + f.size());
    std::merge(g.begin(), g.end(), f.begin(), f.end(), std::back_inserter(pooled));
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    std::vector<double> thresholds;
    thresholds.reserve(2 * pooled.size() + 1);
    thresholds.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        thresholds.push_back(pooled[k]);
        if (k + 1 < pooled.size())
            thresholds.push_back(pooled[k] + (pooled[k + 1] - pooled[k]) / 2.0);
    }
    thresholds.push_back(std::numeric_limits<double>::infinity());

    EerResult best;
    double best_gap = std::numeric_limits<double>::infinity();
    for (double t : thresholds) {
        const ErrorRates rates = error_rates_at(g, f, t);
        const double gap = std::abs(rates.far - rates.frr);
        if (gap < best_gap) {
            best_gap = gap;
            best = {(rates.far + rates.frr) / 2.0, rates.far, rates.frr, t};
        }
    }
    return best;
}

SampleAugmenter gaussian_augmenter(const ParameterVector &params, PerturbMode mode)
{
    validate(params);
    return [params, mode](const SampleRef &, const FeatureVector &source, int count, std::uint64_t seed) {
        Rng rng(seed);
        const auto vectors = perturb_features(source, params, count, rng, mode);
        FeatureMatrix out(source.size(), count);
        for (int k = 0; k < count; ++k)
            out.col(k) = vectors[static_cast<std::size_t>(k)];
        return out;
    };
}

std::pair<double, double> mean_std(std::span<const double> values)
{
    if (values.empty())
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double sum = 0.0;
    for (double v : values)
        sum += v;
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() == 1)
        return {mean, 0.0};
    double sq = 0.0;
    for (double v : values)
        sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

namespace {

struct RepetitionScores
{
    std::vector<double> genuine;
    std::vector<double> skilled;
    std::vector<double> random;
};

EerRow score_repetition(const std::vector<RepetitionScores> &per_writer, int rep, int r, int d, std::uint64_t seed)
{
    std::vector<double> genuine, skilled, random, forgeries;
    std::vector<double> writer_eers;
    for (const auto &w : per_writer) {
        genuine.insert(genuine.end(), w.genuine.begin(), w.genuine.end());
        skilled.insert(skilled.end(), w.skilled.begin(), w.skilled.end());
        random.insert(random.end(), w.random.begin(), w.random.end());
        std::vector<double> wf = w.skilled;
        wf.insert(wf.end(), w.random.begin(), w.random.end());
        if (!w.genuine.empty() && !wf.empty())
            writer_eers.push_back(compute_eer(w.genuine, wf).eer);
    }
    forgeries = skilled;
    forgeries.insert(forgeries.end(), random.begin(), random.end());

    EerRow row;
    row.repetition = rep;
    row.r = r;
    row.d = d;
    row.seed = seed;
    const EerResult pooled = compute_eer(genuine, forgeries);
    row.eer = pooled.eer;
    row.far = pooled.far;
    row.frr = pooled.frr;
    row.eer_skilled = skilled.empty() ? std::numeric_limits<double>::quiet_NaN() : compute_eer(genuine, skilled).eer;
    row.eer_random = random.empty() ? std::numeric_limits<double>::quiet_NaN() : compute_eer(genuine, random).eer;
    row.eer_per_writer = mean_std(writer_eers).first;
    return row;
}

} // namespace

EerReport run_protocol(const ProtocolConfig &config, const FeatureDataset &data, const SampleAugmenter &augmenter)
{
    if (config.repetitions < 1)
        throw ConfigError("protocol: at least one repetition is required");
    if (config.train_genuine.empty() || config.synthetic.empty())
        throw ConfigError("protocol: r and d lists must be non-empty");
    for (int d : config.synthetic) {
        if (d < 0)
            throw ConfigError("protocol: synthetic count must be non-negative");
        if (d > 0 && !augmenter)
            throw ConfigError("protocol: synthetic samples requested without an augmenter");
    }
    if (data.size() < 2)
        throw DataError("protocol: at least two writers are required");
    const Eigen::Index dim = data.front().genuine.rows();
    std::vector<WriterCounts> counts;
    for (const auto &w : data) {
        if (w.genuine.rows() != dim || (w.skilled.cols() > 0 && w.skilled.rows() != dim))
            throw DataError("protocol: writer '" + w.id + "' has inconsistent feature dimension");
        counts.push_back({static_cast<std::size_t>(w.genuine.cols()), static_cast<std::size_t>(w.skilled.cols())});
    }

    EerReport report;
    report.seed = config.seed;
    for (int r : config.train_genuine) {
        if (r < 1)
            throw ConfigError("protocol: r must be at least 1");
        for (int rep = 0; rep < config.repetitions; ++rep) {
            const std::uint64_t rep_seed =
                derive_seed(config.seed, {0xE7A1, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(r)});
            SplitConfig split_cfg = config.split;
            split_cfg.train_genuine = static_cast<std::size_t>(r);
            Rng split_rng(derive_seed(rep_seed, {0x5B17}));
            std::vector<WriterSplit> splits;
            try {
                splits = split(counts, split_cfg, split_rng);
            } catch (const DataError &e) {
                // Name the writer instead of its position.
                std::string message = e.what();
                for (std::size_t w = 0; w < data.size(); ++w) {
                    const std::string tag = "writer #" + std::to_string(w) + " ";
                    if (auto at = message.find(tag); at != std::string::npos) {
                        message.replace(at, tag.size(), "writer '" + data[w].id + "' ");
                        break;
                    }
                }
                throw DataError(message);
            }

            // Every sample that enters a training set, positive or negative.
            std::set<SampleRef> sources;
            for (std::size_t w = 0; w < splits.size(); ++w) {
                for (std::size_t i : splits[w].train_genuine)
                    sources.insert({w, i});
                if (config.augment_negatives)
                    for (const auto &ref : splits[w].train_random)
                        sources.insert(ref);
            }
            const std::vector<SampleRef> source_list(sources.begin(), sources.end());
            const int d_max = *std::max_element(config.synthetic.begin(), config.synthetic.end());
            std::vector<FeatureMatrix> synthetic(source_list.size());
            if (d_max > 0) {
                parallel_for(source_list.size(), config.jobs, [&](std::size_t k) {
                    const SampleRef &ref = source_list[k];
                    const std::uint64_t seed = derive_seed(rep_seed, {0xA06, ref.writer, ref.index});
                    synthetic[k] = augmenter(ref, data[ref.writer].genuine.col(static_cast<Eigen::Index>(ref.index)),
                                             d_max, seed);
                    if (synthetic[k].cols() != d_max || synthetic[k].rows() != dim)
                        throw DataError("protocol: augmenter returned a wrongly shaped batch");
                    if (!synthetic[k].allFinite())
                        throw NumericalError("protocol: augmenter produced non-finite values");
                });
            }
            auto synthetic_of = [&](const SampleRef &ref) -> const FeatureMatrix & {
                const auto it = std::lower_bound(source_list.begin(), source_list.end(), ref);
                return synthetic[static_cast<std::size_t>(it - source_list.begin())];
            };

            for (int d : config.synthetic) {
                std::vector<RepetitionScores> scores(data.size());
                parallel_for(data.size(), config.jobs, [&](std::size_t w) {
                    const WriterSplit &s = splits[w];
                    const Eigen::Index pos_count = static_cast<Eigen::Index>(s.train_genuine.size()) * (1 + d);
                    const Eigen::Index neg_base = static_cast<Eigen::Index>(s.train_random.size());
                    const Eigen::Index neg_count = neg_base * (config.augment_negatives ? 1 + d : 1);
                    TrainingSet set{FeatureMatrix(dim, pos_count), FeatureMatrix(dim, neg_count)};
                    Eigen::Index at = 0;
                    for (std::size_t i : s.train_genuine) {
                        set.positives.col(at++) = data[w].genuine.col(static_cast<Eigen::Index>(i));
                        if (d > 0) {
                            set.positives.middleCols(at, d) = synthetic_of({w, i}).leftCols(d);
                            at += d;
                        }
                    }
                    at = 0;
                    for (const auto &ref : s.train_random) {
                        set.negatives.col(at++) = data[ref.writer].genuine.col(static_cast<Eigen::Index>(ref.index));
                        if (d > 0 && config.augment_negatives) {
                            set.negatives.middleCols(at, d) = synthetic_of(ref).leftCols(d);
                            at += d;
                        }
                    }
                    const double gamma = config.gamma > 0.0 ? config.gamma : default_gamma(set);
                    const Classifier model = train_wd_classifier(set, gamma, config.svm).classifier;

                    RepetitionScores &out = scores[w];
                    for (std::size_t i : s.test_genuine)
                        out.genuine.push_back(model.decision_score(data[w].genuine.col(static_cast<Eigen::Index>(i))));
                    for (std::size_t i : s.test_skilled)
                        out.skilled.push_back(model.decision_score(data[w].skilled.col(static_cast<Eigen::Index>(i))));
                    for (const auto &ref : s.test_random)
                        out.random.push_back(
                            model.decision_score(data[ref.writer].genuine.col(static_cast<Eigen::Index>(ref.index))));
                });
                report.rows.push_back(score_repetition(scores, rep, r, d, rep_seed));
            }
        }
    }

    for (int r : config.train_genuine)
        for (int d : config.synthetic) {
            std::vector<double> eer, skilled, random, writer;
            for (const auto &row : report.rows)
                if (row.r == r && row.d == d) {
                    eer.push_back(row.eer);
                    skilled.push_back(row.eer_skilled);
                    random.push_back(row.eer_random);
                    writer.push_back(row.eer_per_writer);
                }
            GridCell cell;
            cell.r = r;
            cell.d = d;
            std::tie(cell.mean, cell.std) = mean_std(eer);
            cell.mean_skilled = mean_std(skilled).first;
            cell.mean_random = mean_std(random).first;
            std::tie(cell.mean_per_writer, cell.std_per_writer) = mean_std(writer);
            report.grid.push_back(cell);
        }
    return report;
}

namespace {

std::string number(double v)
{
    return std::isfinite(v) ? format_double(v) : std::string("nan");
}

std::ofstream open_output(const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write '" + path.string() + "'");
    return out;
}

} // namespace

void write_report_csv(const EerReport &report, const std::filesystem::path &path)
{
    auto out = open_output(path);
    out << "rep,r,d,eer,far,frr,seed\n";
    for (const auto &row : report.rows)
        out << row.repetition << ',' << row.r << ',' << row.d << ',' << number(row.eer) << ',' << number(row.far)
            << ',' << number(row.frr) << ',' << row.seed << '\n';
}

void write_detail_csv(const EerReport &report, const std::filesystem::path &path)
{
    auto out = open_output(path);
    out << "rep,r,d,eer_pooled,eer_skilled,eer_random,eer_per_writer\n";
    for (const auto &row : report.rows)
        out << row.repetition << ',' << row.r << ',' << row.d << ',' << number(row.eer) << ','
            << number(row.eer_skilled) << ',' << number(row.eer_random) << ',' << number(row.eer_per_writer) << '\n';
}

void write_summary_json(const EerReport &report, const std::filesystem::path &path)
{
    using nlohmann::json;
    auto value = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json doc;
    doc["seed"] = report.seed;
    doc["repetitions"] = report.rows.empty() ? 0 : report.rows.size() / std::max<std::size_t>(1, report.grid.size());
    doc["grid"] = json::array();
    for (const auto &cell : report.grid)
        doc["grid"].push_back({{"r", cell.r},
                               {"d", cell.d},
                               {"eer_mean", value(cell.mean)},
                               {"eer_std", value(cell.std)},
                               {"eer_skilled_mean", value(cell.mean_skilled)},
                               {"eer_random_mean", value(cell.mean_random)},
                               {"eer_per_writer_mean", value(cell.mean_per_writer)},
                               {"eer_per_writer_std", value(cell.std_per_writer)}});
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

void write_line_chart(const std::vector<ChartSeries> &series, std::string_view x_label, std::string_view y_label,
                      std::string_view table, const std::filesystem::path &path)
{
    const double width = 640, height = 400, left = 60, right = 20, top = 20, bottom = 50;
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_max = 0.0;
    for (const auto &s : series)
        for (const auto &[x, y] : s.points) {
            if (!std::isfinite(y))
                continue;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_max = std::max(y_max, y);
        }
    if (!std::isfinite(x_min)) {
        x_min = 0.0;
        x_max = 1.0;
    }
    if (x_max <= x_min)
        x_max = x_min + 1.0;
    y_max = y_max > 0.0 ? y_max * 1.1 : 1.0;
    auto px = [&](double x) { return left + (width - left - right) * (x - x_min) / (x_max - x_min); };
    auto py = [&](double y) { return height - bottom - (height - top - bottom) * y / y_max; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<desc>\n" << table << "</desc>\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << width - right << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << top
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
        << x_label << "</text>\n";
    svg << "<text x=\"15\" y=\"" << (top + height - bottom) / 2 << "\" transform=\"rotate(-90 15 "
        << (top + height - bottom) / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    for (int k = 0; k <= 5; ++k) {
        const double y = y_max * k / 5.0;
        const double x = x_min + (x_max - x_min) * k / 5.0;
        svg << "<text x=\"" << left - 5 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
            << std::round(y * 1000.0) / 1000.0 << "</text>\n";
        svg << "<text x=\"" << px(x) << "\" y=\"" << height - bottom + 15 << "\" text-anchor=\"middle\">"
            << std::round(x * 100.0) / 100.0 << "</text>\n";
    }
    static const char *colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
    std::size_t index = 0;
    for (const auto &s : series) {
        auto points = s.points;
        std::sort(points.begin(), points.end());
        const char *color = colors[index % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto &[x, y] : points)
            if (std::isfinite(y))
                svg << px(x) << ',' << py(y) << ' ';
        svg << "\"/>\n";
        if (points.size() <= 40)
            for (const auto &[x, y] : points)
                if (std::isfinite(y))
                    svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
                        << "\"/>\n";
        svg << "<text x=\"" << width - right - 90 << "\" y=\"" << top + 15 * (index + 1) << "\" fill=\"" << color
            << "\">" << s.label << "</text>\n";
        ++index;
    }
    svg << "</svg>\n";
    auto out = open_output(path);
    out << svg.str();
}

void write_eer_svg(const EerReport &report, const std::filesystem::path &path)
{
    std::map<int, ChartSeries> by_r;
    std::ostringstream table;
    table << "r,d,eer_mean,eer_std\n";
    for (const auto &cell : report.grid) {
        auto &s = by_r[cell.r];
        s.label = "r = " + std::to_string(cell.r);
        s.points.emplace_back(cell.d, cell.mean * 100.0);
        table << cell.r << ',' << cell.d << ',' << number(cell.mean) << ',' << number(cell.std) << '\n';
    }
    std::vector<ChartSeries> series;
    for (auto &[r, s] : by_r)
        series.push_back(std::move(s));
    write_line_chart(series, "synthetic samples per training sample (d)", "mean EER (%)", table.str(), path);
}

} // namespace sigvar
