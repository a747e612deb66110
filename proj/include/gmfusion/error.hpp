#ifndef GMFUSION_ERROR_HPP
#define GMFUSION_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmfusion {

// Malformed caller input (out-of-domain labels, bad configuration, ...).
class input_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A precondition of an operation does not hold (e.g. an infeasible incumbent).
class contract_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Failure of an output stream or file.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class parse_error : public input_error {
public:
  parse_error(std::size_t line, const std::string& what)
  : input_error("line " + std::to_string(line) + ": " + what)
  , line_(line)
  { }

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

}

#endif
