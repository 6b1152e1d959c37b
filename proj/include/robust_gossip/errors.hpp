#ifndef ROBUST_GOSSIP_ERRORS_HPP
#define ROBUST_GOSSIP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgossip {

// Invalid parameters passed to a constructor or generator.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A randomized generator gave up after its retry budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Eigensolver or other iterative numerics failed to converge.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const { return iterations_; }

 private:
  std::size_t iterations_;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Mismatched sizes or incompatible components at trial setup.
class SetupError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Experiment configuration problems (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_ERRORS_HPP
