#include "damo/mixspace.hpp"

#include "damo/error.hpp"
#include "damo/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace damo::mixspace {

namespace {

__extension__ using Wide = unsigned __int128;

std::uint32_t checked_sum(const std::vector<std::uint32_t>& counts)
{
    std::uint64_t total = 0;
    for (auto c : counts) {
        total += c;
    }
    if (total > std::numeric_limits<std::uint32_t>::max()) {
        throw DomainError("lattice point: batch size overflows 32 bits");
    }
    return static_cast<std::uint32_t>(total);
}

void require_dims(std::size_t m, std::uint32_t b)
{
    if (m == 0) {
        throw DomainError("lattice: number of datasets m must be >= 1");
    }
    if (b == 0) {
        throw DomainError("lattice: batch size b must be >= 1");
    }
}

} // namespace

LatticePoint::LatticePoint(std::vector<std::uint32_t> counts)
    : counts_(std::move(counts))
{
    if (counts_.empty()) {
        throw DomainError("lattice point: counts must be non-empty");
    }
    b_ = checked_sum(counts_);
    if (b_ == 0) {
        throw DomainError("lattice point: batch size must be positive");
    }
}

LatticePoint::LatticePoint(std::vector<std::uint32_t> counts, std::uint32_t b)
    : LatticePoint(std::move(counts))
{
    if (b_ != b) {
        throw DomainError("lattice point: counts sum to " + std::to_string(b_) + ", expected " + std::to_string(b));
    }
}

std::string LatticePoint::to_string() const
{
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        out << (i ? "," : "") << counts_[i];
    }
    out << ')';
    return out.str();
}

MixtureProportion::MixtureProportion(std::vector<double> values)
    : values_(std::move(values))
{
    if (values_.empty()) {
        throw DomainError("mixture proportion: must have at least one entry");
    }
    double sum = 0.0;
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("mixture proportion: entries must lie in [0, 1]");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw DomainError("mixture proportion: entries must sum to 1");
    }
}

void DatasetCatalog::validate() const
{
    if (sizes.empty()) {
        throw DomainError("catalog: at least one dataset is required");
    }
    if (!names.empty() && names.size() != sizes.size()) {
        throw DomainError("catalog: names and sizes have different lengths");
    }
    for (auto n : sizes) {
        if (n == 0) {
            throw DomainError("catalog: dataset sizes must be >= 1");
        }
    }
}

std::uint64_t DatasetCatalog::total() const
{
    return std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0});
}

BigInt lattice_size(std::size_t m, std::uint32_t b)
{
    require_dims(m, b);
    // C(n, r) with n = m+b-1, r = min(m-1, b); each partial product is itself a binomial.
    const std::uint64_t n = static_cast<std::uint64_t>(m) + b - 1;
    const std::uint64_t r = std::min<std::uint64_t>(m - 1, b);
    BigInt acc = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
        acc *= (n - r + i);
        acc /= i;
    }
    return acc;
}

std::uint64_t lattice_size_u64(std::size_t m, std::uint32_t b)
{
    const BigInt size = lattice_size(m, b);
    if (size > BigInt(std::numeric_limits<std::uint64_t>::max())) {
        throw DomainError("lattice size C(m+b-1, m-1) exceeds 64 bits");
    }
    return size.convert_to<std::uint64_t>();
}

std::uint64_t composition_count(std::uint32_t total, std::size_t parts) noexcept
{
    if (parts == 0) {
        return total == 0 ? 1 : 0;
    }
    const std::uint64_t n = static_cast<std::uint64_t>(total) + parts - 1;
    const std::uint64_t r = std::min<std::uint64_t>(parts - 1, total);
    Wide acc = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i;
        if (acc > std::numeric_limits<std::uint64_t>::max()) {
            return std::numeric_limits<std::uint64_t>::max();
        }
    }
    return static_cast<std::uint64_t>(acc);
}

LatticePoint first_point(std::size_t m, std::uint32_t b)
{
    require_dims(m, b);
    std::vector<std::uint32_t> counts(m, 0);
    counts.back() = b;
    return LatticePoint(std::move(counts), b);
}

bool next_point(LatticePoint& point)
{
    auto& c = point.counts_;
    const std::size_t m = c.size();
    if (m < 2) {
        return false;
    }
    // Rightmost position (excluding the last) whose suffix still holds mass.
    std::uint32_t suffix = c[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) {
        if (suffix > 0) {
            ++c[i];
            for (std::size_t j = i + 1; j + 1 < m; ++j) {
                c[j] = 0;
            }
            c[m - 1] = suffix - 1;
            return true;
        }
        suffix += c[i];
    }
    return false;
}

LatticeRange::LatticeRange(std::size_t m, std::uint32_t b)
    : m_(m)
    , b_(b)
{
    require_dims(m, b);
}

LatticePoint unrank_lattice(std::uint64_t index, std::size_t m, std::uint32_t b)
{
    const std::uint64_t size = lattice_size_u64(m, b);
    if (index >= size) {
        throw DomainError("unrank: index " + std::to_string(index) + " out of range for lattice of size " +
                          std::to_string(size));
    }
    std::vector<std::uint32_t> counts(m, 0);
    std::uint32_t remaining = b;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const std::size_t rest = m - i - 1;
        std::uint32_t v = 0;
        for (;; ++v) {
            const std::uint64_t block = composition_count(remaining - v, rest);
            if (index < block) {
                break;
            }
            index -= block;
        }
        counts[i] = v;
        remaining -= v;
    }
    counts[m - 1] = remaining;
    return LatticePoint(std::move(counts), b);
}

std::uint64_t rank_lattice_point(const LatticePoint& point)
{
    const auto& c = point.counts();
    const std::size_t m = c.size();
    std::uint32_t remaining = point.batch_size();
    std::uint64_t index = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const std::size_t rest = m - i - 1;
        for (std::uint32_t v = 0; v < c[i]; ++v) {
            index += composition_count(remaining - v, rest);
        }
        remaining -= c[i];
    }
    return index;
}

std::vector<LatticePoint> sample_lattice(std::size_t m, std::uint32_t b, std::size_t n, std::uint64_t seed)
{
    const std::uint64_t size = lattice_size_u64(m, b);
    if (n > size) {
        throw DomainError("sample_lattice: requested " + std::to_string(n) + " points but the lattice only has " +
                          std::to_string(size));
    }
    Rng rng(derive_seed(seed, 0x1a77ULL));
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(n * 2);
    std::vector<LatticePoint> out;
    out.reserve(n);
    while (out.size() < n) {
        const std::uint64_t index = uniform_index(rng, size);
        if (seen.insert(index).second) {
            out.push_back(unrank_lattice(index, m, b));
        }
    }
    return out;
}

MixtureProportion to_proportions(const LatticePoint& point)
{
    const double b = point.batch_size();
    std::vector<double> p(point.dims());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = point[i] / b;
    }
    return MixtureProportion(std::move(p));
}

MixtureProportion uniform_mixture(std::size_t m)
{
    if (m == 0) {
        throw DomainError("uniform_mixture: m must be >= 1");
    }
    return MixtureProportion(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

MixtureProportion natural_mixture(const DatasetCatalog& catalog)
{
    catalog.validate();
    const double total = static_cast<double>(catalog.total());
    std::vector<double> p(catalog.sizes.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = static_cast<double>(catalog.sizes[i]) / total;
    }
    return MixtureProportion(std::move(p));
}

} // namespace damo::mixspace
