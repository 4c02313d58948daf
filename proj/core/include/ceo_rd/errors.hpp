#pragma once

#include <stdexcept>
#include <string>

namespace ceo_rd {

/// Raised when an input falls outside the region where a quantity is defined:
/// a non-PSD covariance, a distortion outside (d_min, gamma_x), a program case
/// whose spectrum ordering does not hold. The message names the violated bound.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace ceo_rd
