#include "damo/step_grid.hpp"

#include "damo/error.hpp"

#include <string>

namespace damo {

StepGrid::StepGrid(std::vector<std::uint32_t> steps, std::uint32_t total_steps)
    : steps_(std::move(steps))
    , total_(total_steps)
{
    if (total_ == 0) {
        throw DomainError("step grid: total steps T must be >= 1");
    }
    if (steps_.empty()) {
        throw DomainError("step grid: at least one step is required");
    }
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        if (steps_[i] == 0 || steps_[i] > total_) {
            throw DomainError("step grid: step " + std::to_string(steps_[i]) + " outside (0, " +
                              std::to_string(total_) + "]");
        }
        if (i > 0 && steps_[i] <= steps_[i - 1]) {
            throw DomainError("step grid: steps must be strictly increasing");
        }
    }
}

StepGrid StepGrid::every(std::uint32_t tau, std::uint32_t total_steps)
{
    if (tau == 0 || total_steps == 0 || total_steps % tau != 0) {
        throw DomainError("step grid: checkpoint interval must divide the total step count");
    }
    std::vector<std::uint32_t> steps;
    for (std::uint32_t t = tau; t <= total_steps; t += tau) {
        steps.push_back(t);
    }
    return StepGrid(std::move(steps), total_steps);
}

StepGrid StepGrid::quarters(std::uint32_t total_steps)
{
    if (total_steps == 0 || total_steps % 4 != 0) {
        throw DomainError("step grid: quarter checkpoints need T divisible by 4");
    }
    return every(total_steps / 4, total_steps);
}

std::vector<double> StepGrid::normalized() const
{
    std::vector<double> out(steps_.size());
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        out[i] = normalized(i);
    }
    return out;
}

bool StepGrid::aligned_to(std::uint32_t tau) const noexcept
{
    if (tau == 0) {
        return false;
    }
    for (auto s : steps_) {
        if (s % tau != 0) {
            return false;
        }
    }
    return true;
}

} // namespace damo
