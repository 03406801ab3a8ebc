#pragma once

#include <stdexcept>

namespace endgame {

/// Raised when a caller breaks a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace endgame
