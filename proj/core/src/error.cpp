#include "uqcal/error.hpp"

namespace uqcal {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_input: return "invalid-input";
    case errc::degenerate_embedding: return "degenerate-embedding";
    case errc::degenerate_kernel: return "degenerate-kernel";
    case errc::not_psd: return "not-psd";
    case errc::insufficient_data: return "insufficient-data";
    case errc::inseparable_data: return "inseparable-data";
    case errc::empty_input: return "empty-input";
    case errc::undefined_metric: return "undefined-metric";
    case errc::template_error: return "template-error";
    case errc::parse_error: return "parse-error";
    case errc::duplicate_id: return "duplicate-id";
    case errc::alignment_error: return "alignment-error";
    case errc::missing_policy_row: return "missing-policy-row";
    case errc::training_divergence: return "training-divergence";
    case errc::fixture_incomplete: return "fixture-incomplete";
    case errc::provider_error: return "provider-error";
    case errc::config_error: return "config-error";
    case errc::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace uqcal
