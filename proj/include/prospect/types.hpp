#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prospect {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  ValidationError(int row_, std::string field_, const std::string& msg)
      : Error(msg), row(row_), field(std::move(field_)) {}
  int row;
  std::string field;
};
struct EstimationError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};
struct PositivityError : Error {
  using Error::Error;
};
struct SpecificationError : Error {
  using Error::Error;
};
struct InfeasibilityError : Error {
  InfeasibilityError(const std::string& msg, double best_share_)
      : Error(msg), best_share(best_share_) {}
  double best_share;
};

// The seven allocation arms; no_program is the baseline everywhere.
enum class ProgramId : int {
  no_program = 0,
  vocational,
  computer,
  language,
  job_search,
  employment,
  personality,
};

inline constexpr int kNumPrograms = 7;

inline constexpr std::array<const char*, kNumPrograms> kProgramNames = {
    "no_program", "vocational", "computer", "language",
    "job_search", "employment", "personality"};

inline const char* program_name(ProgramId d) { return kProgramNames[static_cast<int>(d)]; }

ProgramId program_from_name(const std::string& name);

inline ProgramId program_from_index(int k) {
  if (k < 0 || k >= kNumPrograms) throw Error("program index out of range: " + std::to_string(k));
  return static_cast<ProgramId>(k);
}

struct IndividualRecord {
  int id = 0;
  bool female = false;       // sensitive attribute A1
  bool non_citizen = false;  // sensitive attribute A2
  double age = 0.0;          // years, in [24, 55]
  bool married = false;
  double past_income = 0.0;  // CHF, >= 0
  int employability = 1;     // caseworker rating, ordinal {1,2,3}
  double emp_frac_2y = 0.0;  // fraction of last 2 years employed, [0,1]
  double ue_spells_2y = 0.0; // unemployment spells in last 2 years, >= 0
  std::vector<double> extras;  // open schema; names live on the Population
};

struct Population {
  std::vector<IndividualRecord> records;
  std::vector<std::string> extra_names;
  std::optional<std::vector<ProgramId>> decisions;
  std::optional<std::vector<int>> outcomes;  // 1 = long-term unemployed

  int size() const { return static_cast<int>(records.size()); }
  bool has_decisions() const { return decisions.has_value(); }
  bool has_outcomes() const { return outcomes.has_value(); }

  std::array<int, kNumPrograms> arm_counts() const;
};

struct SplitSpec {
  std::vector<int> train_ids;
  std::vector<int> test_ids;
};

struct Violation {
  int row;
  std::string field;
  std::string reason;
};

}  // namespace prospect
