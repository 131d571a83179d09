#pragma once

namespace perturbopt::harness {

/// Worker count from PERTURBOPT_THREADS: unset, empty or 0 selects the
/// hardware concurrency (at least 1); a positive value is the worker count.
/// Malformed values raise ValidationError.
unsigned worker_count();

/// Parses a PERTURBOPT_THREADS value against a given hardware concurrency.
unsigned parse_worker_count(const char* value, unsigned hardware);

}  // namespace perturbopt::harness
