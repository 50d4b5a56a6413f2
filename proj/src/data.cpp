#include "featnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace featnet {

void Dataset::validate() const {
    if (N == 0) throw std::invalid_argument("dataset has no samples");
    if (features.size() != N * M) throw std::invalid_argument("dataset feature size mismatch");
    if (labels.size() != N) throw std::invalid_argument("dataset label count mismatch");
    for (double v : features) {
        if (!std::isfinite(v)) throw std::invalid_argument("dataset contains NaN/Inf features");
    }
    for (double v : labels) {
        if (!std::isfinite(v)) throw std::invalid_argument("dataset contains NaN/Inf labels");
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line_no) {
    const auto t = trim(field);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse \"" + t +
                                 "\" as a number");
    }
    return v;
}

std::uint32_t read_be32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated IDX header");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
}

void finish(Dataset& d, const LoadOptions& opts) {
    if (opts.scale01) scale_features_01(d);
    if (opts.append_bias) append_bias_feature(d);
    d.validate();
}

}  // namespace

Dataset load_csv(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Dataset d;
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = !opts.header;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, opts.delimiter)) fields.push_back(f);
        if (!line.empty() && line.back() == opts.delimiter) fields.emplace_back();
        if (columns == 0) {
            if (fields.size() < 2) {
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": need at least one feature and a label");
            }
            columns = fields.size();
            d.M = columns - 1;
        } else if (fields.size() != columns) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(columns) + " columns, found " +
                                     std::to_string(fields.size()));
        }
        const long lc = opts.label_column < 0 ? static_cast<long>(columns) + opts.label_column
                                              : opts.label_column;
        if (lc < 0 || lc >= static_cast<long>(columns)) {
            throw std::runtime_error("label column out of range");
        }
        for (std::size_t c = 0; c < columns; ++c) {
            const double v = parse_number(fields[c], line_no);
            if (static_cast<long>(c) == lc) {
                d.labels.push_back(v);
            } else {
                d.features.push_back(v);
            }
        }
        ++d.N;
    }
    if (d.N == 0) throw std::runtime_error(path + ": no data rows");
    finish(d, opts);
    return d;
}

Dataset load_idx(const std::string& images_path, const LoadOptions& opts) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path);
    std::ifstream lab(opts.idx_labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open IDX label file \"" + opts.idx_labels_path + "\"");

    if (read_be32(img) != 0x00000803u) throw std::runtime_error(images_path + ": bad IDX image magic");
    const auto count = read_be32(img);
    const auto rows = read_be32(img);
    const auto cols = read_be32(img);
    if (read_be32(lab) != 0x00000801u) throw std::runtime_error("bad IDX label magic");
    if (read_be32(lab) != count) throw std::runtime_error("IDX image/label counts differ");

    Dataset d;
    d.M = std::size_t{rows} * cols;
    std::vector<unsigned char> pixels(d.M);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(d.M))) {
            throw std::runtime_error(images_path + ": truncated at image " + std::to_string(i));
        }
        char raw = 0;
        if (!lab.get(raw)) throw std::runtime_error("IDX labels truncated at " + std::to_string(i));
        const int digit = static_cast<unsigned char>(raw);
        double label = digit;
        if (!opts.digits.empty()) {
            const auto it = std::find(opts.digits.begin(), opts.digits.end(), digit);
            if (it == opts.digits.end()) continue;
            const auto pos = static_cast<double>(it - opts.digits.begin());
            label = opts.digits.size() == 2 ? (pos == 0 ? -1.0 : 1.0) : pos;
        }
        for (auto p : pixels) d.features.push_back(p);
        d.labels.push_back(label);
        ++d.N;
        if (opts.limit > 0 && d.N == opts.limit) break;
    }
    if (d.N == 0) throw std::runtime_error(images_path + ": no images selected");
    finish(d, opts);
    return d;
}

Dataset load_dataset(const std::string& path, const std::string& format, const LoadOptions& opts) {
    if (format == "csv") return load_csv(path, opts);
    if (format == "idx" || format == "idx-images+labels") return load_idx(path, opts);
    throw std::invalid_argument("unknown dataset format \"" + format + "\"");
}

void write_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    for (std::size_t n = 0; n < data.N; ++n) {
        for (std::size_t j = 0; j < data.M; ++j) out << data.features[n * data.M + j] << ',';
        out << data.labels[n] << '\n';
    }
}

void scale_features_01(Dataset& data) {
    for (std::size_t j = 0; j < data.M; ++j) {
        double lo = data.features[j];
        double hi = lo;
        for (std::size_t n = 0; n < data.N; ++n) {
            lo = std::min(lo, data.features[n * data.M + j]);
            hi = std::max(hi, data.features[n * data.M + j]);
        }
        const double span = hi - lo;
        for (std::size_t n = 0; n < data.N; ++n) {
            auto& v = data.features[n * data.M + j];
            v = span > 0.0 ? (v - lo) / span : 0.0;
        }
    }
}

void append_bias_feature(Dataset& data) {
    std::vector<double> out;
    out.reserve(data.N * (data.M + 1));
    for (std::size_t n = 0; n < data.N; ++n) {
        auto r = data.row(n);
        out.insert(out.end(), r.begin(), r.end());
        out.push_back(1.0);
    }
    data.features = std::move(out);
    ++data.M;
}

SyntheticData make_synthetic(const SyntheticSpec& spec) {
    if (spec.N < 1 || spec.M < 1) throw std::invalid_argument("synthetic data needs N, M >= 1");
    const bool softmax = spec.model == "softmax";
    if (!softmax && spec.model != "logistic" && spec.model != "ridge") {
        throw std::invalid_argument("synthetic model must be logistic, softmax or ridge");
    }
    if (softmax && spec.classes < 2) throw std::invalid_argument("softmax needs classes >= 2");
    if (spec.flip_prob < 0.0 || spec.flip_prob > 1.0) {
        throw std::invalid_argument("flip_prob must be in [0, 1]");
    }
    const std::size_t C = softmax ? spec.classes : 1;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SyntheticData out;
    out.planted.resize(spec.M * C);
    for (auto& v : out.planted) v = gauss(rng);

    Dataset& d = out.data;
    d.N = spec.N;
    d.M = spec.M;
    d.features.resize(spec.N * spec.M);
    d.labels.resize(spec.N);
    const double scale = spec.feature_scale / std::sqrt(static_cast<double>(spec.M));
    std::vector<double> score(C);
    for (std::size_t n = 0; n < spec.N; ++n) {
        std::fill(score.begin(), score.end(), 0.0);
        for (std::size_t j = 0; j < spec.M; ++j) {
            const double h = scale * gauss(rng);
            d.features[n * spec.M + j] = h;
            for (std::size_t c = 0; c < C; ++c) score[c] += h * out.planted[j * C + c];
        }
        if (spec.model == "ridge") {
            d.labels[n] = score[0] + spec.noise * gauss(rng);
        } else if (spec.model == "logistic") {
            double y = score[0] >= 0.0 ? 1.0 : -1.0;
            if (unit(rng) < spec.flip_prob) y = -y;
            d.labels[n] = y;
        } else {
            auto y = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
            if (unit(rng) < spec.flip_prob) {
                y = static_cast<std::size_t>(unit(rng) * static_cast<double>(C)) % C;
            }
            d.labels[n] = static_cast<double>(y);
        }
    }
    d.validate();
    return out;
}

Partition partition_features(std::size_t M, std::size_t K) {
    if (K == 0) throw std::invalid_argument("partition needs at least one agent");
    if (M < K) throw std::invalid_argument("even partition needs M >= K");
    Partition p;
    p.M = M;
    const std::size_t base = M / K;
    const std::size_t extra = M % K;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t size = base + (k < extra ? 1 : 0);
        p.offsets.push_back(offset);
        p.sizes.push_back(size);
        offset += size;
    }
    return p;
}

Partition partition_from_sizes(std::size_t M, const std::vector<std::size_t>& sizes) {
    if (sizes.empty()) throw std::invalid_argument("partition needs at least one agent");
    Partition p;
    p.M = M;
    std::size_t offset = 0;
    for (auto s : sizes) {
        if (s == 0) throw std::invalid_argument("every agent needs at least one feature");
        p.offsets.push_back(offset);
        p.sizes.push_back(s);
        offset += s;
    }
    if (offset != M) {
        throw std::invalid_argument("partition sizes sum to " + std::to_string(offset) +
                                    " but M = " + std::to_string(M));
    }
    return p;
}

std::vector<FeatureShard> shard(const Dataset& data, const Partition& partition) {
    if (partition.M != data.M) throw std::invalid_argument("partition M does not match dataset M");
    std::vector<double> norms(data.N, 0.0);
    for (std::size_t n = 0; n < data.N; ++n) {
        for (double v : data.row(n)) norms[n] += v * v;
    }
    std::vector<FeatureShard> shards(partition.agents());
    for (std::size_t k = 0; k < partition.agents(); ++k) {
        auto& s = shards[k];
        s.agent = k;
        s.offset = partition.offsets[k];
        s.width = partition.sizes[k];
        s.N = data.N;
        s.labels = data.labels;
        s.row_norms_sq = norms;
        s.features.resize(data.N * s.width);
        for (std::size_t n = 0; n < data.N; ++n) {
            const auto r = data.row(n);
            std::copy_n(r.begin() + static_cast<std::ptrdiff_t>(s.offset), s.width,
                        s.features.begin() + static_cast<std::ptrdiff_t>(n * s.width));
        }
    }
    return shards;
}

Dataset assemble(const std::vector<FeatureShard>& shards) {
    if (shards.empty()) throw std::invalid_argument("no shards to assemble");
    Dataset d;
    d.N = shards.front().N;
    for (const auto& s : shards) d.M += s.width;
    d.labels = shards.front().labels;
    d.features.resize(d.N * d.M);
    for (const auto& s : shards) {
        for (std::size_t n = 0; n < d.N; ++n) {
            const auto r = s.row(n);
            std::copy(r.begin(), r.end(),
                      d.features.begin() + static_cast<std::ptrdiff_t>(n * d.M + s.offset));
        }
    }
    return d;
}

}  // namespace featnet
