#pragma once

#include <functional>
#include <iosfwd>
#include <memory>

#include "aaslip/nlp.hpp"
#include "aaslip/transcription.hpp"

namespace aaslip::cli {

// Exit statuses.
constexpr int kOk = 0;
constexpr int kInternalError = 1;
constexpr int kUsageError = 2;
constexpr int kSolveFailed = 3;
constexpr int kVerifyFailed = 4;

struct Hooks {
  // Lets a test substitute the problem handed to gradcheck, e.g. one with a
  // deliberately wrong derivative.
  std::function<std::unique_ptr<NlpProblem>(const GaitNlp&)> gradcheck_problem;
};

int run(int argc, char** argv, std::ostream& out, std::ostream& err,
        const Hooks& hooks = {});

}  // namespace aaslip::cli
