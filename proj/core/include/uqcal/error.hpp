// error.hpp — error taxonomy shared across the library.
//
// Every failure the library raises carries an errc tag so callers (the CLI
// in particular) can map failures to exit codes without string matching.

#pragma once

#include <stdexcept>
#include <string>

namespace uqcal {

enum class errc {
  invalid_input,
  degenerate_embedding,
  degenerate_kernel,
  not_psd,
  insufficient_data,
  inseparable_data,
  empty_input,
  undefined_metric,
  template_error,
  parse_error,
  duplicate_id,
  alignment_error,
  missing_policy_row,
  training_divergence,
  fixture_incomplete,
  provider_error,
  config_error,
  io_error,
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace uqcal
