#include "unic/neighbor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "io_util.hpp"

namespace unic {

namespace {
constexpr char kMagic[8] = {'U', 'N', 'I', 'C', 'N', 'B', 'R', '1'};

// Same-class rate among an anchor's mined positives, self excluded.
// Returns -1 when the list has no non-self entries.
double anchor_purity(const AnchorNeighbors& a, std::uint32_t anchor,
                     const std::vector<std::int32_t>& labels) {
    if (a.mined.size() <= 1) return -1.0;
    std::size_t same = 0;
    for (std::size_t r = 1; r < a.mined.size(); ++r) {
        if (labels[a.mined[r]] == labels[anchor]) ++same;
    }
    return static_cast<double>(same) / static_cast<double>(a.mined.size() - 1);
}
}  // namespace

std::vector<std::uint32_t> NeighborIndex::cleaned_positives(std::uint32_t anchor) const {
    const AnchorNeighbors& a = anchors.at(anchor);
    if (a.was_cleaned) return {anchor};
    return a.mined;
}

RankedNeighborhood NeighborIndex::ranked(std::uint32_t anchor) const {
    const AnchorNeighbors& a = anchors.at(anchor);
    return {anchor, a.mined, a.negative_radius, a.negative_tiebreak};
}

double NeighborIndex::removed_fraction() const {
    if (anchors.empty()) return 0.0;
    std::size_t removed = 0;
    for (const auto& a : anchors) removed += a.was_cleaned;
    return static_cast<double>(removed) / static_cast<double>(anchors.size());
}

std::uint32_t second_order_union_size(const MinedNeighborhoods& mined, std::uint32_t anchor) {
    const auto& items = mined.items;
    std::vector<std::uint32_t> pool;
    pool.reserve(std::size_t(mined.tau1) * mined.tau1);
    for (std::uint32_t j : items.at(anchor).positives) {
        const auto& second = items.at(j).positives;
        pool.insert(pool.end(), second.begin(), second.end());
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    return static_cast<std::uint32_t>(pool.size());
}

NeighborIndex clean(const MinedNeighborhoods& mined, std::uint32_t eta) {
    NeighborIndex index;
    index.tau1 = mined.tau1;
    index.tau2 = mined.tau2;
    index.eta = eta;
    index.anchors.resize(mined.items.size());
    for (std::size_t i = 0; i < mined.items.size(); ++i) {
        const RankedNeighborhood& nb = mined.items[i];
        AnchorNeighbors& a = index.anchors[i];
        a.mined = nb.positives;
        a.union_size = second_order_union_size(mined, static_cast<std::uint32_t>(i));
        a.was_cleaned = a.union_size > eta;
        a.negative_radius = nb.negative_radius;
        a.negative_tiebreak = nb.negative_tiebreak;
    }
    return index;
}

void write_index(const NeighborIndex& index, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    io::put_bytes(os, kMagic, 8);
    io::write_u32(os, index.n());
    io::write_u32(os, index.tau1);
    io::write_u32(os, index.tau2);
    io::write_u32(os, index.eta);
    for (const auto& a : index.anchors) {
        io::write_u8(os, a.was_cleaned ? 1 : 0);
        io::write_u32(os, a.union_size);
        io::write_u32(os, static_cast<std::uint32_t>(a.mined.size()));
        for (std::uint32_t j : a.mined) io::write_u32(os, j);
        io::write_f32(os, a.negative_radius);
        io::write_u32(os, a.negative_tiebreak);
    }
    os.flush();
    if (!os) throw std::runtime_error("I/O failure while writing " + path);
}

NeighborIndex read_index(const std::string& path, std::uint32_t expected_n) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    io::get_bytes(is, magic, 8, "magic");
    if (std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("bad magic: not a UNICNBR1 file");
    }
    NeighborIndex index;
    std::uint32_t n = io::read_u32(is, "n");
    if (expected_n != 0 && n != expected_n) {
        throw std::runtime_error("neighbor index does not match embedding count");
    }
    index.tau1 = io::read_u32(is, "tau1");
    index.tau2 = io::read_u32(is, "tau2");
    index.eta = io::read_u32(is, "eta");
    index.anchors.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        AnchorNeighbors& a = index.anchors[i];
        std::uint8_t flag = io::read_u8(is, "cleaned flag");
        if (flag > 1) throw std::runtime_error("bad cleaned flag");
        a.was_cleaned = flag != 0;
        a.union_size = io::read_u32(is, "union size");
        std::uint32_t count = io::read_u32(is, "positive count");
        if (count > n) throw std::runtime_error("positive count exceeds n");
        a.mined.resize(count);
        for (std::uint32_t r = 0; r < count; ++r) {
            a.mined[r] = io::read_u32(is, "positive index");
            if (a.mined[r] >= n) throw std::runtime_error("positive index out of range");
        }
        a.negative_radius = io::read_f32(is, "negative radius");
        a.negative_tiebreak = io::read_u32(is, "negative tiebreak");
        if (a.negative_tiebreak >= n) throw std::runtime_error("negative tiebreak out of range");
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("trailing bytes after payload");
    }
    return index;
}

void SupervisionConfig::validate() const {
    if (positive_source_unlabeled == PositiveSource::labeled) {
        throw std::invalid_argument("unlabeled anchors cannot use labeled positives");
    }
    if (negative_source_unlabeled == NegativeSource::labeled) {
        throw std::invalid_argument("unlabeled anchors cannot use labeled negatives");
    }
    if (labeled_negative_fraction < 0.0 || labeled_negative_fraction > 1.0) {
        throw std::invalid_argument("labeled_negative_fraction must lie in [0,1]");
    }
}

NeighborSampler::NeighborSampler(const EmbeddingSet& set, const NeighborIndex& index,
                                 const SplitSpec* split, const SupervisionConfig& cfg)
    : set_(set), index_(index), split_(nullptr), cfg_(cfg) {
    cfg_.validate();
    if (index.n() != set.n) throw std::invalid_argument("index does not match embedding count");
    if (cfg.mode == Mode::gcd) {
        if (split == nullptr) throw std::invalid_argument("gcd mode requires a split");
        split->validate(set);
        split_ = split;
        // Dense class slots for the labeled population.
        std::map<std::int32_t, std::size_t> slot_of;
        class_slot_.assign(set.n, -1);
        for (std::uint32_t i = 0; i < set.n; ++i) {
            if (!split->labeled_mask[i]) continue;
            std::int32_t c = set.labels[i];
            auto [it, fresh] = slot_of.try_emplace(c, labeled_by_class_.size());
            if (fresh) labeled_by_class_.emplace_back();
            labeled_by_class_[it->second].push_back(i);
            class_slot_[i] = static_cast<std::int32_t>(it->second);
            ++labeled_total_;
        }
    }
}

bool NeighborSampler::anchor_labeled(std::uint32_t anchor) const {
    return split_ != nullptr && split_->labeled_mask[anchor] != 0;
}

std::uint32_t NeighborSampler::sample_positive(std::uint32_t anchor, std::mt19937_64& rng) const {
    const AnchorNeighbors& a = index_.anchors[anchor];
    PositiveSource source = anchor_labeled(anchor) ? cfg_.positive_source_labeled
                                                   : cfg_.positive_source_unlabeled;
    if (source == PositiveSource::labeled) {
        const auto& peers = labeled_by_class_[class_slot_[anchor]];
        if (peers.empty()) throw std::runtime_error("empty same-class labeled set");
        std::uniform_int_distribution<std::size_t> pick(0, peers.size() - 1);
        return peers[pick(rng)];
    }
    if (source == PositiveSource::cleaned && a.was_cleaned) return anchor;
    std::uniform_int_distribution<std::size_t> pick(0, a.mined.size() - 1);
    return a.mined[pick(rng)];
}

std::uint32_t NeighborSampler::draw_mined_negative(std::uint32_t anchor,
                                                   std::mt19937_64& rng) const {
    if (index_.tau2 >= set_.n) throw std::runtime_error("empty negative set");
    const AnchorNeighbors& a = index_.anchors[anchor];
    std::uniform_int_distribution<std::uint32_t> pick(0, set_.n - 1);
    for (;;) {
        std::uint32_t j = pick(rng);
        if (is_negative(set_, anchor, a.negative_radius, a.negative_tiebreak, j)) return j;
    }
}

std::uint32_t NeighborSampler::draw_random_negative(std::uint32_t anchor,
                                                    std::mt19937_64& rng) const {
    if (set_.n < 2) throw std::runtime_error("empty negative set");
    std::uniform_int_distribution<std::uint32_t> pick(0, set_.n - 1);
    for (;;) {
        std::uint32_t j = pick(rng);
        if (j != anchor) return j;
    }
}

std::uint32_t NeighborSampler::sample_negative(std::uint32_t anchor, std::mt19937_64& rng) const {
    NegativeSource source = anchor_labeled(anchor) ? cfg_.negative_source_labeled
                                                   : cfg_.negative_source_unlabeled;
    if (source == NegativeSource::random_any) return draw_random_negative(anchor, rng);
    if (source == NegativeSource::labeled) {
        std::size_t same = labeled_by_class_[class_slot_[anchor]].size();
        bool have_other = labeled_total_ > same;
        std::bernoulli_distribution use_labeled(cfg_.labeled_negative_fraction);
        if (have_other && use_labeled(rng)) {
            // Uniform over labeled samples of a different class.
            std::uniform_int_distribution<std::size_t> pick_cls(0, labeled_by_class_.size() - 1);
            for (;;) {
                const auto& bucket = labeled_by_class_[pick_cls(rng)];
                std::uniform_int_distribution<std::size_t> pick(0, bucket.size() - 1);
                std::uint32_t j = bucket[pick(rng)];
                if (set_.labels[j] != set_.labels[anchor]) return j;
            }
        }
        return draw_mined_negative(anchor, rng);
    }
    return draw_mined_negative(anchor, rng);
}

NeighborStats neighbor_stats(const NeighborIndex& index, const EmbeddingSet& set,
                             std::vector<std::uint32_t> etas, std::size_t sweep_points) {
    if (!set.has_labels()) throw std::invalid_argument("missing labels");
    if (index.n() != set.n) throw std::invalid_argument("index does not match embedding count");

    std::vector<std::uint32_t> sizes(index.n());
    std::vector<double> purity(index.n());
    for (std::uint32_t i = 0; i < index.n(); ++i) {
        sizes[i] = index.anchors[i].union_size;
        purity[i] = anchor_purity(index.anchors[i], i, set.labels);
    }

    NeighborStats stats;
    {
        std::map<std::uint32_t, std::uint32_t> hist;
        for (auto s : sizes) ++hist[s];
        stats.union_histogram.assign(hist.begin(), hist.end());
    }

    if (etas.empty()) {
        std::vector<std::uint32_t> sorted = sizes;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t q = 0; q < sweep_points; ++q) {
            double frac = (static_cast<double>(q) + 0.5) / static_cast<double>(sweep_points);
            auto pos = static_cast<std::size_t>(frac * static_cast<double>(sorted.size()));
            if (pos >= sorted.size()) pos = sorted.size() - 1;
            etas.push_back(sorted[pos]);
        }
    }
    std::sort(etas.begin(), etas.end());

    for (std::uint32_t eta : etas) {
        NeighborStatsRow row{eta, 0.0, 0.0, 0.0};
        std::size_t removed = 0, retained_cnt = 0, removed_cnt = 0;
        double retained_sum = 0.0, removed_sum = 0.0;
        for (std::uint32_t i = 0; i < index.n(); ++i) {
            bool gone = sizes[i] > eta;
            removed += gone;
            if (purity[i] < 0.0) continue;  // self-only list, no purity
            if (gone) {
                removed_sum += purity[i];
                ++removed_cnt;
            } else {
                retained_sum += purity[i];
                ++retained_cnt;
            }
        }
        row.removed_fraction = static_cast<double>(removed) / static_cast<double>(index.n());
        row.retained_purity = retained_cnt ? retained_sum / static_cast<double>(retained_cnt)
                                           : std::numeric_limits<double>::quiet_NaN();
        row.removed_purity = removed_cnt ? removed_sum / static_cast<double>(removed_cnt)
                                         : std::numeric_limits<double>::quiet_NaN();
        stats.rows.push_back(row);
    }
    return stats;
}

std::string NeighborStats::to_csv() const {
    std::ostringstream os;
    os << "eta,removed_fraction,retained_purity,removed_purity\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,%.17g\n", row.eta, row.removed_fraction,
                      row.retained_purity, row.removed_purity);
        os << buf;
    }
    return os.str();
}

}  // namespace unic
