#include "idsnet/errors.hpp"

namespace idsnet {

namespace {

std::string describe(const std::string& source, std::size_t line, std::size_t field,
                     const std::string& what) {
  std::string msg = source + ":" + std::to_string(line);
  if (field != 0) msg += ": field " + std::to_string(field);
  return msg + ": " + what;
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, std::size_t field,
                       const std::string& what)
    : InputError(describe(source, line, field, what)),
      source_(std::move(source)),
      line_(line),
      field_(field) {}

}  // namespace idsnet
