#pragma once

// Fixed data-mixing lattice: integer compositions of a batch size b over m
// datasets, their proportion vectors, and the uniform / natural baselines.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <vector>

namespace damo::mixspace {

using BigInt = boost::multiprecision::cpp_int;

/// One batch composition: counts[i] samples of dataset i per batch, summing to b.
class LatticePoint {
public:
    LatticePoint() = default;

    /// Batch size is taken as the sum of counts. Throws DomainError if empty or zero-sum.
    explicit LatticePoint(std::vector<std::uint32_t> counts);

    /// Throws DomainError unless sum(counts) == b.
    LatticePoint(std::vector<std::uint32_t> counts, std::uint32_t b);

    const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }
    std::uint32_t batch_size() const noexcept { return b_; }
    std::size_t dims() const noexcept { return counts_.size(); }
    std::uint32_t operator[](std::size_t i) const { return counts_[i]; }

    std::string to_string() const;

    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
    friend std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b)
    {
        return a.counts_ <=> b.counts_;
    }

private:
    friend bool next_point(LatticePoint& point);

    std::vector<std::uint32_t> counts_;
    std::uint32_t b_ = 0;
};

/// A point on the probability simplex. Entries in [0,1], sum 1 within 1e-9.
class MixtureProportion {
public:
    static constexpr double kSumTolerance = 1e-9;

    MixtureProportion() = default;
    /// Throws DomainError if any entry is outside [0,1] or the sum is not 1.
    explicit MixtureProportion(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t dims() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const MixtureProportion&, const MixtureProportion&) = default;

private:
    std::vector<double> values_;
};

struct DatasetCatalog {
    std::vector<std::string> names;
    std::vector<std::uint64_t> sizes;

    /// Throws DomainError on empty catalog, mismatched lengths or a zero size.
    void validate() const;
    std::uint64_t total() const;
};

/// C(m+b-1, m-1), exact.
BigInt lattice_size(std::size_t m, std::uint32_t b);

/// lattice_size narrowed to 64 bits; throws DomainError if it does not fit.
std::uint64_t lattice_size_u64(std::size_t m, std::uint32_t b);

/// Number of compositions of `total` into `parts` non-negative parts, or
/// UINT64_MAX if it overflows.
std::uint64_t composition_count(std::uint32_t total, std::size_t parts) noexcept;

/// Lexicographically smallest composition: (0, ..., 0, b).
LatticePoint first_point(std::size_t m, std::uint32_t b);

/// Advance to the lexicographic successor in place. Returns false (leaving the
/// point unchanged) once (b, 0, ..., 0) has been reached.
bool next_point(LatticePoint& point);

/// Lazy range over every composition of b into m parts in lexicographic order.
class LatticeRange {
public:
    LatticeRange(std::size_t m, std::uint32_t b);

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = LatticePoint;
        using difference_type = std::ptrdiff_t;
        using pointer = const LatticePoint*;
        using reference = const LatticePoint&;

        iterator() = default;
        explicit iterator(LatticePoint start)
            : point_(std::move(start))
            , done_(false)
        {
        }

        reference operator*() const { return point_; }
        pointer operator->() const { return &point_; }
        iterator& operator++()
        {
            done_ = !next_point(point_);
            return *this;
        }
        void operator++(int) { ++*this; }
        friend bool operator==(const iterator& a, const iterator& b) { return a.done_ && b.done_; }

    private:
        LatticePoint point_;
        bool done_ = true;
    };

    iterator begin() const { return iterator(first_point(m_, b_)); }
    iterator end() const { return iterator(); }

private:
    std::size_t m_;
    std::uint32_t b_;
};

inline LatticeRange enumerate_lattice(std::size_t m, std::uint32_t b)
{
    return LatticeRange(m, b);
}

/// The index-th composition in lexicographic order.
/// Throws DomainError when index >= lattice_size(m, b).
LatticePoint unrank_lattice(std::uint64_t index, std::size_t m, std::uint32_t b);

/// Inverse of unrank_lattice.
std::uint64_t rank_lattice_point(const LatticePoint& point);

/// n distinct lattice points drawn uniformly without replacement; deterministic per seed.
std::vector<LatticePoint> sample_lattice(std::size_t m, std::uint32_t b, std::size_t n, std::uint64_t seed);

MixtureProportion to_proportions(const LatticePoint& point);

MixtureProportion uniform_mixture(std::size_t m);

MixtureProportion natural_mixture(const DatasetCatalog& catalog);

} // namespace damo::mixspace
