#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace damo {

/// Checkpoint steps a run is evaluated at, with the total step count T they normalize against.
class StepGrid {
public:
    StepGrid() = default;

    /// Throws DomainError if steps is empty, unsorted, has duplicates, or leaves (0, T].
    StepGrid(std::vector<std::uint32_t> steps, std::uint32_t total_steps);

    /// {tau, 2 tau, ..., T}. tau must divide T.
    static StepGrid every(std::uint32_t tau, std::uint32_t total_steps);

    /// {T/4, T/2, 3T/4, T}. T must be divisible by 4.
    static StepGrid quarters(std::uint32_t total_steps);

    const std::vector<std::uint32_t>& steps() const noexcept { return steps_; }
    std::uint32_t total_steps() const noexcept { return total_; }
    std::size_t size() const noexcept { return steps_.size(); }
    bool empty() const noexcept { return steps_.empty(); }
    std::uint32_t operator[](std::size_t i) const { return steps_[i]; }

    double normalized(std::size_t i) const { return static_cast<double>(steps_[i]) / total_; }
    std::vector<double> normalized() const;

    /// True when every step is a multiple of tau.
    bool aligned_to(std::uint32_t tau) const noexcept;

private:
    std::vector<std::uint32_t> steps_;
    std::uint32_t total_ = 0;
};

} // namespace damo
