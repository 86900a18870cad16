#include "damo/error.hpp"

namespace damo {

TrainingError::TrainingError(const std::string& what, std::size_t step)
    : std::runtime_error(what + " (at training step " + std::to_string(step) + ")")
    , step_(step)
{
}

} // namespace damo
