#include "unic/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "io_util.hpp"

namespace unic {

namespace {
constexpr char kMagic[8] = {'U', 'N', 'I', 'C', 'E', 'M', 'B', '1'};
constexpr std::size_t kCsvRowLimit = 10000;
}  // namespace

void EmbeddingSet::validate() const {
    if (n < 1 || dim < 1) throw std::invalid_argument("embedding set requires n >= 1 and dim >= 1");
    if (data.size() != std::size_t(n) * dim) {
        throw std::invalid_argument("embedding data size does not match n*dim");
    }
    for (float v : data) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite data");
    }
    if (!labels.empty() && labels.size() != n) {
        throw std::invalid_argument("label vector length does not match n");
    }
}

std::size_t SplitSpec::labeled_count() const {
    std::size_t c = 0;
    for (auto m : labeled_mask) c += m != 0;
    return c;
}

void SplitSpec::validate(const EmbeddingSet& set) const {
    if (labeled_mask.size() != set.n) {
        throw std::invalid_argument("labeled mask length does not match n");
    }
    for (std::int32_t c : old_classes) {
        if (new_classes.count(c)) throw std::invalid_argument("old and new classes overlap");
    }
    for (std::uint32_t i = 0; i < set.n; ++i) {
        if (!labeled_mask[i]) continue;
        if (!set.has_labels() || set.labels[i] < 0) {
            throw std::invalid_argument("labeled sample without a known class");
        }
        if (!old_classes.count(set.labels[i])) {
            throw std::invalid_argument("labeled sample's class is not an Old class");
        }
    }
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
    set.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    io::put_bytes(os, kMagic, 8);
    io::write_u32(os, set.n);
    io::write_u32(os, set.dim);
    io::write_u8(os, set.has_labels() ? 1 : 0);
    io::write_f32_block(os, set.data.data(), set.data.size());
    if (set.has_labels()) io::write_i32_block(os, set.labels.data(), set.labels.size());
    os.flush();
    if (!os) throw std::runtime_error("I/O failure while writing " + path);
}

EmbeddingSet read_embeddings(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    io::get_bytes(is, magic, 8, "magic");
    if (std::memcmp(magic, kMagic, 8) != 0) {
        if (std::memcmp(magic, kMagic, 7) == 0) {
            throw std::runtime_error("unsupported format version");
        }
        throw std::runtime_error("bad magic: not a UNICEMB1 file");
    }
    EmbeddingSet set;
    set.n = io::read_u32(is, "n");
    set.dim = io::read_u32(is, "dim");
    if (set.n < 1 || set.dim < 1) throw std::runtime_error("bad header: n and dim must be >= 1");
    std::uint8_t flag = io::read_u8(is, "label flag");
    if (flag > 1) throw std::runtime_error("bad header: label flag must be 0 or 1");
    set.data.resize(std::size_t(set.n) * set.dim);
    io::read_f32_block(is, set.data.data(), set.data.size(), "embedding payload");
    if (flag) {
        set.labels.resize(set.n);
        io::read_i32_block(is, set.labels.data(), set.labels.size(), "label block");
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("trailing bytes after payload");
    }
    set.validate();
    return set;
}

EmbeddingSet read_embeddings_csv(const std::string& path, bool with_labels) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    EmbeddingSet set;
    std::string line;
    std::size_t cols = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (set.n >= kCsvRowLimit) throw std::runtime_error("CSV import limited to < 10000 rows");
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.empty()) continue;
        if (cols == 0) {
            cols = cells.size();
            if (with_labels && cols < 2) throw std::runtime_error("CSV with labels needs >= 2 columns");
            set.dim = static_cast<std::uint32_t>(with_labels ? cols - 1 : cols);
        } else if (cells.size() != cols) {
            throw std::runtime_error("inconsistent CSV column count at row " + std::to_string(set.n));
        }
        std::size_t feature_cols = with_labels ? cols - 1 : cols;
        for (std::size_t c = 0; c < feature_cols; ++c) {
            std::size_t used = 0;
            float v = std::stof(cells[c], &used);
            while (used < cells[c].size() && std::isspace(static_cast<unsigned char>(cells[c][used]))) ++used;
            if (used != cells[c].size()) throw std::runtime_error("bad float in CSV: " + cells[c]);
            set.data.push_back(v);
        }
        if (with_labels) {
            std::size_t used = 0;
            long lab = std::stol(cells.back(), &used);
            while (used < cells.back().size() && std::isspace(static_cast<unsigned char>(cells.back()[used]))) ++used;
            if (used != cells.back().size()) throw std::runtime_error("bad label in CSV: " + cells.back());
            set.labels.push_back(static_cast<std::int32_t>(lab));
        }
        ++set.n;
    }
    if (set.n == 0) throw std::runtime_error("empty CSV file: " + path);
    set.validate();
    return set;
}

void write_split(const SplitSpec& split, const std::string& path) {
    nlohmann::ordered_json j;
    j["labeled_mask"] = split.labeled_mask;
    j["old_classes"] = std::vector<std::int32_t>(split.old_classes.begin(), split.old_classes.end());
    j["new_classes"] = std::vector<std::int32_t>(split.new_classes.begin(), split.new_classes.end());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << j.dump() << "\n";
    if (!os) throw std::runtime_error("I/O failure while writing " + path);
}

SplitSpec read_split(const std::string& path, std::uint32_t expected_n) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("bad split file: ") + e.what());
    }
    SplitSpec split;
    split.labeled_mask = j.at("labeled_mask").get<std::vector<std::uint8_t>>();
    for (auto c : j.at("old_classes").get<std::vector<std::int32_t>>()) split.old_classes.insert(c);
    for (auto c : j.at("new_classes").get<std::vector<std::int32_t>>()) split.new_classes.insert(c);
    if (expected_n != 0 && split.labeled_mask.size() != expected_n) {
        throw std::runtime_error("split mask length does not match embedding count");
    }
    for (std::int32_t c : split.old_classes) {
        if (split.new_classes.count(c)) throw std::runtime_error("bad split file: old/new classes overlap");
    }
    return split;
}

std::pair<EmbeddingSet, SplitSpec> generate_gaussian_mixture(const MixtureParams& params) {
    if (params.k < 1) throw std::invalid_argument("k must be >= 1");
    if (params.dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (params.n < params.k) throw std::invalid_argument("n must be >= k");
    if (params.labeled_fraction < 0 || params.labeled_fraction > 1 ||
        params.old_class_fraction < 0 || params.old_class_fraction > 1) {
        throw std::invalid_argument("fractions must lie in [0,1]");
    }

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> means(std::size_t(params.k) * params.dim);
    for (double& m : means) m = normal(rng);

    if (params.k >= 2) {
        double min_dist = 0.0;
        bool first = true;
        for (std::uint32_t a = 0; a < params.k; ++a) {
            for (std::uint32_t b = a + 1; b < params.k; ++b) {
                double d2 = 0.0;
                for (std::uint32_t c = 0; c < params.dim; ++c) {
                    double d = means[std::size_t(a) * params.dim + c] -
                               means[std::size_t(b) * params.dim + c];
                    d2 += d * d;
                }
                double d = std::sqrt(d2);
                if (first || d < min_dist) min_dist = d, first = false;
            }
        }
        if (min_dist <= 0.0) throw std::runtime_error("degenerate mean configuration");
        double scale = params.separation / min_dist;
        for (double& m : means) m *= scale;
    }

    EmbeddingSet set;
    set.n = params.n;
    set.dim = params.dim;
    set.data.resize(std::size_t(params.n) * params.dim);
    set.labels.resize(params.n);

    // Class sizes as equal as floor/remainder allows, samples stored
    // class by class.
    std::uint32_t base = params.n / params.k;
    std::uint32_t rem = params.n % params.k;
    std::uint32_t row = 0;
    for (std::uint32_t c = 0; c < params.k; ++c) {
        std::uint32_t size = base + (c < rem ? 1 : 0);
        for (std::uint32_t s = 0; s < size; ++s, ++row) {
            set.labels[row] = static_cast<std::int32_t>(c);
            float* out = set.row(row);
            const double* mean = means.data() + std::size_t(c) * params.dim;
            for (std::uint32_t d = 0; d < params.dim; ++d) {
                out[d] = static_cast<float>(mean[d] + normal(rng));
            }
        }
    }

    SplitSpec split = make_gcd_split(set, params.old_class_fraction,
                                     params.labeled_fraction, params.seed);
    return {std::move(set), std::move(split)};
}

SplitSpec make_gcd_split(const EmbeddingSet& set, double old_class_fraction,
                         double labeled_fraction, std::uint64_t seed) {
    if (!set.has_labels()) throw std::invalid_argument("set without labels");
    if (old_class_fraction < 0 || old_class_fraction > 1 ||
        labeled_fraction < 0 || labeled_fraction > 1) {
        throw std::invalid_argument("fractions must lie in [0,1]");
    }

    std::set<std::int32_t> classes;
    for (std::int32_t l : set.labels) {
        if (l >= 0) classes.insert(l);
    }
    if (classes.empty()) throw std::invalid_argument("set without known classes");

    std::mt19937_64 rng(seed);
    std::vector<std::int32_t> order(classes.begin(), classes.end());
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t n_old = static_cast<std::size_t>(
        std::ceil(old_class_fraction * static_cast<double>(order.size())));
    SplitSpec split;
    split.labeled_mask.assign(set.n, 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_old ? split.old_classes : split.new_classes).insert(order[i]);
    }

    // Label floor(labeled_fraction * class size) samples of each Old
    // class; classes visited in sorted order so the draw sequence is
    // independent of the shuffle above.
    for (std::int32_t c : split.old_classes) {
        std::vector<std::uint32_t> members;
        for (std::uint32_t i = 0; i < set.n; ++i) {
            if (set.labels[i] == c) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t want = static_cast<std::size_t>(
            labeled_fraction * static_cast<double>(members.size()));
        for (std::size_t i = 0; i < want; ++i) split.labeled_mask[members[i]] = 1;
    }
    split.validate(set);
    return split;
}

}  // namespace unic
