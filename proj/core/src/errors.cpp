#include "indexrag/errors.hpp"

#include <utility>

namespace indexrag {

TemplateError::TemplateError(std::string placeholder, const std::string& message)
    : Error(message), placeholder_(std::move(placeholder)) {}

GatewayError::GatewayError(const std::string& message, int status) : Error(message), status_(status) {}

}  // namespace indexrag
