#include "ecgbench/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace ecgbench {

std::array<std::size_t, kNumClasses> Dataset::class_histogram() const {
    std::array<std::size_t, kNumClasses> hist{};
    for (const BeatRecord& r : records) hist[static_cast<std::size_t>(r.label)]++;
    return hist;
}

Tensor Dataset::feature_matrix() const {
    Tensor m({records.size(), kBeatSamples});
    for (std::size_t i = 0; i < records.size(); ++i)
        for (std::size_t j = 0; j < kBeatSamples; ++j)
            m.at(i, j) = records[i].samples[j];
    return m;
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].label;
    return out;
}

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    return end != begin && end && *end == '\0' && std::isfinite(out);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) fields.push_back(cur);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");

    Dataset ds;
    std::string line;
    std::size_t row_number = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields = split_fields(line);
        if (first_content_line) {
            first_content_line = false;
            double probe;
            if (!parse_double(fields.front(), probe)) continue;  // header row
        }
        if (fields.size() != kBeatSamples + 1) {
            throw DataError("row " + std::to_string(row_number) + ": expected " +
                            std::to_string(kBeatSamples + 1) + " columns, got " +
                            std::to_string(fields.size()));
        }
        BeatRecord rec;
        for (std::size_t i = 0; i < kBeatSamples; ++i) {
            if (!parse_double(fields[i], rec.samples[i])) {
                throw DataError("row " + std::to_string(row_number) + ": field " +
                                std::to_string(i + 1) + " is not numeric");
            }
        }
        double label_value;
        if (!parse_double(fields.back(), label_value)) {
            throw DataError("row " + std::to_string(row_number) +
                            ": label is not numeric");
        }
        const int label = static_cast<int>(std::lround(label_value));
        if (label < 0 || label >= static_cast<int>(kNumClasses)) {
            throw DataError("row " + std::to_string(row_number) + ": label " +
                            std::to_string(label) + " outside 0.." +
                            std::to_string(kNumClasses - 1));
        }
        rec.label = label;
        ds.records.push_back(rec);
    }
    if (ds.empty()) throw DataError("empty dataset: '" + path + "'");
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    char buf[64];
    for (const BeatRecord& r : ds.records) {
        std::string line;
        for (double s : r.samples) {
            std::snprintf(buf, sizeof buf, "%.17g", s);
            line += buf;
            line += ',';
        }
        line += std::to_string(r.label);
        out << line << '\n';
    }
    if (!out) throw DataError("write failure on '" + path + "'");
}

namespace {

struct Bump {
    double center;
    double width;
    double amplitude;
};

// Distinct per-class waveform templates; disjoint-enough bump placements
// keep the class means well separated.
const std::vector<Bump>& class_template(int label) {
    static const std::vector<std::vector<Bump>> templates = {
        {{50.0, 4.0, 1.3}},
        {{95.0, 10.0, 0.9}},
        {{140.0, 6.0, -1.1}},
        {{60.0, 18.0, 0.6}, {130.0, 5.0, 0.9}},
        {{30.0, 5.0, 0.8}, {95.0, 5.0, -0.8}, {160.0, 5.0, 0.8}},
    };
    return templates[static_cast<std::size_t>(label)];
}

}  // namespace

Dataset synth_generate(const std::array<std::size_t, kNumClasses>& n_per_class,
                       std::uint64_t seed) {
    const std::size_t total =
        std::accumulate(n_per_class.begin(), n_per_class.end(), std::size_t{0});
    if (total == 0) throw DataError("synth_generate: all class counts are zero");

    RngStream rng(seed);
    Dataset ds;
    ds.records.reserve(total);
    for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
        for (std::size_t k = 0; k < n_per_class[cls]; ++k) {
            BeatRecord rec;
            rec.label = static_cast<int>(cls);
            const double center_jitter = rng.normal(0.0, 0.5);
            const double amp_jitter = 1.0 + rng.normal(0.0, 0.03);
            for (std::size_t i = 0; i < kBeatSamples; ++i) {
                double v = 0.0;
                for (const Bump& b : class_template(rec.label)) {
                    const double d = (static_cast<double>(i) - b.center - center_jitter) / b.width;
                    v += b.amplitude * amp_jitter * std::exp(-0.5 * d * d);
                }
                rec.samples[i] = v + rng.normal(0.0, 0.02);
            }
            ds.records.push_back(rec);
        }
    }
    return ds;
}

Dataset add_gaussian_noise(const Dataset& ds, const NoiseSpec& spec) {
    if (spec.sigma < 0.0) throw DataError("add_gaussian_noise: negative sigma");
    if (spec.sigma == 0.0) return ds;
    RngStream rng(spec.seed);
    Dataset out = ds;
    for (BeatRecord& r : out.records)
        for (double& s : r.samples) s += rng.normal(0.0, spec.sigma);
    return out;
}

namespace {

double squared_distance(const BeatRecord& a, const BeatRecord& b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < kBeatSamples; ++i) {
        const double d = a.samples[i] - b.samples[i];
        d2 += d * d;
    }
    return d2;
}

}  // namespace

Dataset smote_oversample(const Dataset& ds, std::size_t k_neighbors,
                         std::uint64_t seed, std::vector<SmoteDraw>* draws) {
    if (ds.empty()) throw DataError("smote_oversample: empty dataset");
    if (k_neighbors < 1) throw DataError("smote_oversample: k_neighbors must be >= 1");

    const auto hist = ds.class_histogram();
    const std::size_t majority = *std::max_element(hist.begin(), hist.end());

    // Per-class record indices.
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i)
        by_class[static_cast<std::size_t>(ds.records[i].label)].push_back(i);

    for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
        if (hist[cls] == 1 && hist[cls] < majority) {
            throw DataError("smote_oversample: class " + std::to_string(cls) +
                            " has fewer than 2 members");
        }
    }

    RngStream rng(seed);
    Dataset out = ds;  // real records first, untouched
    for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
        const std::vector<std::size_t>& members = by_class[cls];
        if (members.empty() || hist[cls] >= majority) continue;

        std::size_t k = k_neighbors;
        if (k > members.size() - 1) {
            k = members.size() - 1;
            std::cerr << "smote_oversample: k_neighbors clamped to " << k
                      << " for class " << cls << "\n";
        }

        // k nearest same-class neighbors of each member, by Euclidean distance.
        std::vector<std::vector<std::size_t>> neighbors(members.size());
        for (std::size_t a = 0; a < members.size(); ++a) {
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(members.size() - 1);
            for (std::size_t b = 0; b < members.size(); ++b) {
                if (b == a) continue;
                dist.emplace_back(
                    squared_distance(ds.records[members[a]], ds.records[members[b]]),
                    members[b]);
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                              dist.end());
            for (std::size_t j = 0; j < k; ++j)
                neighbors[a].push_back(dist[j].second);
        }

        for (std::size_t need = majority - hist[cls]; need > 0; --need) {
            const std::size_t a = rng.uniform_int(members.size());
            const std::size_t nn = neighbors[a][rng.uniform_int(k)];
            const double u = rng.uniform();
            const BeatRecord& x = ds.records[members[a]];
            const BeatRecord& xn = ds.records[nn];
            BeatRecord synth;
            synth.label = static_cast<int>(cls);
            for (std::size_t i = 0; i < kBeatSamples; ++i)
                synth.samples[i] = x.samples[i] + u * (xn.samples[i] - x.samples[i]);
            out.records.push_back(synth);
            if (draws) draws->push_back({synth.label, members[a], nn, u});
        }
    }
    return out;
}

ScalerParams fit_scaler(const Dataset& train) {
    if (train.empty()) throw DataError("fit_scaler: empty training set");
    ScalerParams p;
    const double n = static_cast<double>(train.size());
    for (std::size_t j = 0; j < kBeatSamples; ++j) {
        double mean = 0.0;
        for (const BeatRecord& r : train.records) mean += r.samples[j];
        mean /= n;
        double var = 0.0;
        for (const BeatRecord& r : train.records) {
            const double d = r.samples[j] - mean;
            var += d * d;
        }
        var /= n;
        p.mean[j] = mean;
        p.stddev[j] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return p;
}

Dataset apply_scaler(const Dataset& ds, const ScalerParams& params) {
    Dataset out = ds;
    for (BeatRecord& r : out.records) {
        for (std::size_t j = 0; j < kBeatSamples; ++j) {
            r.samples[j] -= params.mean[j];
            if (params.stddev[j] > 0.0) r.samples[j] /= params.stddev[j];
        }
    }
    return out;
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0) {
        throw DataError("split_train_val: train_fraction must lie in (0,1)");
    }
    if (ds.empty()) throw DataError("split_train_val: empty dataset");

    RngStream rng(spec.seed);
    auto shuffle = [&rng](std::vector<std::size_t>& idx) {
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
    };

    std::vector<std::size_t> train_idx, val_idx;
    if (spec.stratified) {
        std::array<std::vector<std::size_t>, kNumClasses> by_class;
        for (std::size_t i = 0; i < ds.size(); ++i)
            by_class[static_cast<std::size_t>(ds.records[i].label)].push_back(i);
        for (const auto& members : by_class) {
            if (members.size() == 1) {
                throw DataError(
                    "split_train_val: stratification impossible, a class has a "
                    "single member");
            }
        }

        // Largest-remainder allocation: per-class counts stay within one of
        // their exact quota while the total matches round(frac * N).
        const std::size_t target_total = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(ds.size())));
        std::array<std::size_t, kNumClasses> take{};
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t allocated = 0;
        for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
            const double quota =
                spec.train_fraction * static_cast<double>(by_class[cls].size());
            take[cls] = static_cast<std::size_t>(quota);
            allocated += take[cls];
            remainders.emplace_back(quota - static_cast<double>(take[cls]), cls);
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t r = 0; allocated < target_total && r < remainders.size(); ++r) {
            const std::size_t cls = remainders[r].second;
            if (take[cls] < by_class[cls].size()) {
                ++take[cls];
                ++allocated;
            }
        }

        for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
            std::vector<std::size_t> idx = by_class[cls];
            shuffle(idx);
            for (std::size_t i = 0; i < idx.size(); ++i)
                (i < take[cls] ? train_idx : val_idx).push_back(idx[i]);
        }
    } else {
        std::vector<std::size_t> idx(ds.size());
        std::iota(idx.begin(), idx.end(), 0);
        shuffle(idx);
        const std::size_t n_train = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(ds.size())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? train_idx : val_idx).push_back(idx[i]);
    }

    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    Dataset train, val;
    for (std::size_t i : train_idx) train.records.push_back(ds.records[i]);
    for (std::size_t i : val_idx) val.records.push_back(ds.records[i]);
    if (train.empty() || val.empty()) {
        throw DataError("split_train_val: a side of the split is empty");
    }
    return {train, val};
}

}  // namespace ecgbench
