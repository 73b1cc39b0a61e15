#pragma once

// Uniform entry point over the problem families that produce verdicts.

#include <span>
#include <variant>

#include "convlab/framework.hpp"
#include "convlab/gaussian.hpp"
#include "convlab/lineworld.hpp"
#include "convlab/perrin.hpp"

namespace convlab {

using MethodSpec = std::variant<lineworld::Method, gaussian::TestRule, perrin::Method>;
using EvidenceItem = std::variant<Interval, gaussian::SampleSummary, perrin::Prism>;

// Dispatches to the owning module's decision rule. Throws ConfigError when an
// evidence item belongs to a different problem family than the method.
// Gaussian rules decide on the latest (cumulative) sample summary.
Verdict apply_method(const MethodSpec& method, std::span<const EvidenceItem> history);

}  // namespace convlab
