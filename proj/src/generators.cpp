#include "delaybench/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace delaybench {

double gradual_mix(std::uint64_t t, std::uint64_t t0, std::uint64_t w) {
    double z = 4.0 * (double(t) - double(t0)) / double(w);
    return 1.0 / (1.0 + std::exp(-z));
}

DriftSchedule DriftSchedule::stationary() {
    return DriftSchedule{};
}

DriftSchedule DriftSchedule::abrupt(std::vector<std::uint64_t> points) {
    DriftSchedule s;
    s.change_points = std::move(points);
    s.kind = DriftKind::abrupt;
    for (std::size_t i = 1; i < s.change_points.size(); ++i) {
        if (s.change_points[i] <= s.change_points[i - 1]) {
            throw std::invalid_argument("change points must be strictly increasing");
        }
    }
    return s;
}

DriftSchedule DriftSchedule::gradual(std::vector<std::uint64_t> points, std::uint64_t window) {
    if (window == 0) throw std::invalid_argument("gradual drift needs a positive window");
    DriftSchedule s = abrupt(std::move(points));
    s.kind = DriftKind::gradual;
    s.window = window;
    return s;
}

std::size_t DriftSchedule::segment(std::uint64_t t) const {
    std::size_t k = 0;
    while (k < change_points.size() && t >= change_points[k]) ++k;
    return k;
}

std::size_t DriftSchedule::concept_at(std::uint64_t t, Rng& rng) const {
    if (change_points.empty()) return 0;
    if (kind == DriftKind::abrupt) return segment(t);
    // Mix the two concepts around the nearest change point; windows in
    // the presets are far narrower than the gaps between changes.
    std::size_t k = 0;
    for (std::size_t i = 1; i < change_points.size(); ++i) {
        auto dist = [&](std::uint64_t cp) {
            return cp > t ? cp - t : t - cp;
        };
        if (dist(change_points[i]) < dist(change_points[k])) k = i;
    }
    double p_new = gradual_mix(t, change_points[k], window);
    return rng.bernoulli(p_new) ? k + 1 : k;
}

namespace {

void validate_schedule_concepts(const DriftSchedule& schedule, std::size_t n_concepts,
                                const char* what) {
    if (n_concepts != schedule.n_concepts()) {
        throw std::invalid_argument(std::string(what) +
                                    ": need one concept per drift segment");
    }
}

}  // namespace

AgrawalGenerator::AgrawalGenerator(AgrawalConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
    validate_schedule_concepts(config_.schedule, config_.functions.size(), "agrawal");
    for (int f : config_.functions) {
        if (f < 1 || f > 10) throw std::invalid_argument("agrawal function index outside 1..10");
    }
}

bool AgrawalGenerator::group_a(int function, const std::array<double, 9>& a) {
    double salary = a[0], commission = a[1];
    int age = int(a[2]), elevel = int(a[3]);
    double hvalue = a[6];
    int hyears = int(a[7]);
    double loan = a[8];
    auto in = [](double lo, double x, double hi) { return lo <= x && x <= hi; };
    switch (function) {
        case 1:
            return age < 40 || age >= 60;
        case 2:
            if (age < 40) return in(50000, salary, 100000);
            if (age < 60) return in(75000, salary, 125000);
            return in(25000, salary, 75000);
        case 3:
            if (age < 40) return elevel <= 1;
            if (age < 60) return elevel >= 1 && elevel <= 3;
            return elevel >= 2;
        case 4:
            if (age < 40) {
                return elevel <= 1 ? in(25000, salary, 75000) : in(50000, salary, 100000);
            }
            if (age < 60) {
                return (elevel >= 1 && elevel <= 3) ? in(50000, salary, 100000)
                                                    : in(75000, salary, 125000);
            }
            return elevel >= 2 ? in(50000, salary, 100000) : in(25000, salary, 75000);
        case 5:
            if (age < 40) {
                return in(50000, salary, 100000) ? in(100000, loan, 300000)
                                                 : in(200000, loan, 400000);
            }
            if (age < 60) {
                return in(75000, salary, 125000) ? in(200000, loan, 400000)
                                                 : in(300000, loan, 500000);
            }
            return in(25000, salary, 75000) ? in(300000, loan, 500000)
                                            : in(100000, loan, 300000);
        case 6: {
            double total = salary + commission;
            if (age < 40) return in(50000, total, 100000);
            if (age < 60) return in(75000, total, 125000);
            return in(25000, total, 75000);
        }
        case 7:
            return 2.0 * (salary + commission) / 3.0 - loan / 5.0 - 20000.0 > 0.0;
        case 8:
            return 2.0 * (salary + commission) / 3.0 - 5000.0 * elevel - 20000.0 > 0.0;
        case 9:
            return 2.0 * (salary + commission) / 3.0 - 5000.0 * elevel - loan / 5.0 -
                       10000.0 > 0.0;
        case 10: {
            double equity = hyears >= 20 ? hvalue * (hyears - 20) / 10.0 : 0.0;
            return 2.0 * salary / 3.0 - 5000.0 * elevel + equity / 5.0 - 10000.0 > 0.0;
        }
        default:
            throw std::invalid_argument("agrawal function index outside 1..10");
    }
}

Instance AgrawalGenerator::next() {
    std::array<double, 9> a{};
    a[0] = rng_.uniform(20000.0, 150000.0);                       // salary
    a[1] = a[0] >= 75000.0 ? 0.0 : rng_.uniform(10000.0, 75000.0);  // commission
    a[2] = double(20 + rng_.uniform_int(61));                     // age
    a[3] = double(rng_.uniform_int(5));                           // elevel
    a[4] = double(1 + rng_.uniform_int(20));                      // car
    a[5] = double(rng_.uniform_int(9));                           // zipcode
    a[6] = (9.0 - a[5]) * 100000.0 * rng_.uniform(0.5, 1.5);      // hvalue
    a[7] = double(1 + rng_.uniform_int(30));                      // hyears
    a[8] = rng_.uniform(0.0, 500000.0);                           // loan

    std::size_t active = config_.schedule.concept_at(t_, rng_);
    int label = group_a(config_.functions[active], a) ? 1 : 0;

    Instance x;
    x.id = t_++;
    x.features.assign(a.begin(), a.end());
    x.label = label;
    return x;
}

SeaGenerator::SeaGenerator(SeaConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
    validate_schedule_concepts(config_.schedule, config_.thetas.size(), "sea");
    if (config_.noise < 0.0 || config_.noise >= 1.0) {
        throw std::invalid_argument("sea noise must be in [0,1)");
    }
}

Instance SeaGenerator::next() {
    Instance x;
    x.id = t_;
    x.features = {rng_.uniform(0.0, 10.0), rng_.uniform(0.0, 10.0), rng_.uniform(0.0, 10.0)};
    std::size_t active = config_.schedule.concept_at(t_, rng_);
    bool label = sea_label(x.features[0], x.features[1], config_.thetas[active]);
    if (config_.noise > 0.0 && rng_.bernoulli(config_.noise)) label = !label;
    x.label = label ? 1 : 0;
    ++t_;
    return x;
}

HyperplaneGenerator::HyperplaneGenerator(HyperplaneConfig config, std::uint64_t seed)
    : config_(config), rng_(seed) {
    if (config_.n_features == 0 || config_.n_drift > config_.n_features) {
        throw std::invalid_argument("hyperplane feature counts are inconsistent");
    }
    weights_.resize(config_.n_features);
    for (auto& w : weights_) w = rng_.uniform01();
    directions_.assign(config_.n_features, 1.0);
}

Instance HyperplaneGenerator::next() {
    Instance x;
    x.id = t_;
    x.features.resize(config_.n_features);
    double sum = 0.0, weight_sum = 0.0;
    for (std::size_t j = 0; j < config_.n_features; ++j) {
        x.features[j] = rng_.uniform01();
        sum += weights_[j] * x.features[j];
        weight_sum += weights_[j];
    }
    bool label = sum > 0.5 * weight_sum;
    if (config_.noise > 0.0 && rng_.bernoulli(config_.noise)) label = !label;
    x.label = label ? 1 : 0;

    for (std::size_t j = 0; j < config_.n_drift; ++j) {
        weights_[j] += directions_[j] * config_.magnitude;
        if (config_.reversal_prob > 0.0 && rng_.bernoulli(config_.reversal_prob)) {
            directions_[j] = -directions_[j];
        }
    }
    ++t_;
    return x;
}

RareEventGenerator::RareEventGenerator(RareEventConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
    if (!(config_.positive_rate > 0.0) || config_.positive_rate > 0.5) {
        throw std::invalid_argument("positive rate must be in (0, 0.5]");
    }
    if (config_.n_features == 0 || config_.n_components == 0) {
        throw std::invalid_argument("rare-event mixture needs features and components");
    }

    // Component means come from a setup generator derived from the
    // stream seed so the instance draws stay aligned across configs.
    Rng setup(derive_seed(seed, 0x5e7u));
    for (int cls = 0; cls < 2; ++cls) {
        component_means_[cls].resize(config_.n_components);
    }
    for (std::size_t k = 0; k < config_.n_components; ++k) {
        std::vector<double> base(config_.n_features);
        std::vector<double> dir(config_.n_features);
        double norm = 0.0;
        for (std::size_t j = 0; j < config_.n_features; ++j) {
            base[j] = setup.normal();
            dir[j] = setup.normal();
            norm += dir[j] * dir[j];
        }
        norm = std::sqrt(norm);
        std::vector<double> shifted(config_.n_features);
        for (std::size_t j = 0; j < config_.n_features; ++j) {
            shifted[j] = base[j] + config_.separation * dir[j] / norm;
        }
        component_means_[0][k] = std::move(base);
        component_means_[1][k] = std::move(shifted);
    }

    // Each concept permutes the feature coordinates: class geometry is
    // preserved but the decision boundary moves.
    permutations_.resize(config_.schedule.n_concepts());
    for (std::size_t c = 0; c < permutations_.size(); ++c) {
        auto& perm = permutations_[c];
        perm.resize(config_.n_features);
        for (std::size_t j = 0; j < perm.size(); ++j) perm[j] = j;
        if (c == 0) continue;
        Rng shuffler(derive_seed(seed, 0x9000u + c));
        for (std::size_t j = perm.size(); j > 1; --j) {
            std::swap(perm[j - 1], perm[shuffler.uniform_int(j)]);
        }
    }
}

Instance RareEventGenerator::next() {
    std::size_t active = config_.schedule.concept_at(t_, rng_);
    int label = rng_.bernoulli(config_.positive_rate) ? 1 : 0;
    std::size_t k = rng_.uniform_int(config_.n_components);
    const auto& mean = component_means_[label][k];
    const auto& perm = permutations_[active];

    Instance x;
    x.id = t_++;
    x.label = label;
    x.features.resize(config_.n_features);
    for (std::size_t j = 0; j < config_.n_features; ++j) {
        x.features[j] = mean[perm[j]] + rng_.normal();
    }
    return x;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || cell.empty()) {
        throw std::runtime_error("csv line " + std::to_string(line_no) +
                                 ": cannot parse '" + cell + "' in column " + column);
    }
    return value;
}

}  // namespace

CsvStream csv_replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv file is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_csv_line(line);
    CsvStream out;
    std::size_t cols = header.size();
    if (cols >= 2 && header[cols - 1] == "delay" && header[cols - 2] == "label") {
        out.has_delays = true;
        out.n_features = cols - 2;
    } else if (cols >= 1 && header[cols - 1] == "label") {
        out.n_features = cols - 1;
    } else {
        throw std::runtime_error("csv header must end with 'label' or 'label,delay'");
    }
    if (out.n_features == 0) throw std::runtime_error("csv has no feature columns");
    for (std::size_t j = 0; j < out.n_features; ++j) {
        if (header[j] != "f" + std::to_string(j)) {
            throw std::runtime_error("csv header column " + std::to_string(j) +
                                     " must be f" + std::to_string(j) + ", got '" +
                                     header[j] + "'");
        }
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != cols) {
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(cols) + " cells, got " +
                                     std::to_string(cells.size()));
        }
        Instance x;
        x.id = out.instances.size();
        x.features.resize(out.n_features);
        for (std::size_t j = 0; j < out.n_features; ++j) {
            x.features[j] = parse_cell(cells[j], line_no, header[j]);
        }
        double label = parse_cell(cells[out.n_features], line_no, "label");
        if (label != 0.0 && label != 1.0) {
            throw std::runtime_error("csv line " + std::to_string(line_no) +
                                     ": label must be 0 or 1");
        }
        x.label = int(label);
        if (out.has_delays) {
            double d = parse_cell(cells[out.n_features + 1], line_no, "delay");
            if (d < 0.0 || d != std::floor(d)) {
                throw std::runtime_error("csv line " + std::to_string(line_no) +
                                         ": delay must be a non-negative integer");
            }
            out.delays.push_back(std::int64_t(d));
        }
        out.instances.push_back(std::move(x));
    }
    return out;
}

}  // namespace delaybench
