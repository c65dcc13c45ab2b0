#include "stmca/error.hpp"

#include <sstream>

namespace stmca {

namespace {
std::string with_value(const std::string& what, const char* label, double value) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (" << label << " = " << value << ")";
    return os.str();
}
}  // namespace

QuadratureError::QuadratureError(const std::string& what, double abscissa)
    : Error(with_value(what, "abscissa", abscissa)), abscissa_(abscissa) {}

TuningError::TuningError(const std::string& what, double coordinate)
    : Error(with_value(what, "coordinate", coordinate)), coordinate_(coordinate) {}

ConfigError::ConfigError(const std::string& field_path, const std::string& message)
    : Error(field_path + ": " + message), field_path_(field_path) {}

ErrorCategory categorize(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e))
        return ErrorCategory::config;
    if (dynamic_cast<const QuadratureError*>(&e) || dynamic_cast<const TuningError*>(&e) ||
        dynamic_cast<const ClassificationError*>(&e) || dynamic_cast<const RunawayError*>(&e) ||
        dynamic_cast<const DomainError*>(&e))
        return ErrorCategory::numerical;
    return ErrorCategory::other;
}

}  // namespace stmca
