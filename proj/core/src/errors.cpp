#include "netfx/errors.hpp"

namespace netfx {

ParseError::ParseError(const std::string& origin, std::size_t line, const std::string& message)
    : Error(Category::io_parse, origin + ":" + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace netfx
