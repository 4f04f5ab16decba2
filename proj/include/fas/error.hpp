#pragma once

#include <stdexcept>
#include <string>

namespace fas {

/// Library-wide error type. Everything a caller can mishandle (bad shapes,
/// invalid configs, degenerate inputs) throws this with a descriptive message.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace fas
