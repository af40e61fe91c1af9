#pragma once

// JSON views of analysis results. Optional values map to null.

#include "dipt/descriptive.hpp"
#include "dipt/frame.hpp"
#include "dipt/inference.hpp"
#include "dipt/pipeline.hpp"
#include "dipt/standardization.hpp"

namespace dipt {

ojson json_of(const MarginalEstimate& e);
ojson json_of(const FittedGlm& m);
ojson json_of(const TestResult& t);
ojson json_of(const StratifiedEstimate& s, Factor factor);
ojson json_of(const DescriptiveTable& t);
ojson json_of(const GroupComparison& c);
ojson json_of_tests(const GroupComparison& c);

}  // namespace dipt
