#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "macrocast/month.hpp"

namespace macrocast {

/// Base class for every recoverable failure raised by the library. kind()
/// names the concrete failure and is what run reports and manifests record.
/// The CLI maps ConfigInvalid to exit code 1 and every other Error to 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define MACROCAST_ERROR(Name)                                         \
    class Name : public Error {                                       \
      public:                                                         \
        using Error::Error;                                           \
        const char* kind() const noexcept override { return #Name; }  \
    }

// data model
MACROCAST_ERROR(RangeOutOfBounds);
MACROCAST_ERROR(EmptyPeriod);

// ingestion
MACROCAST_ERROR(MalformedRow);
MACROCAST_ERROR(DuplicateMonth);
MACROCAST_ERROR(MissingColumn);
MACROCAST_ERROR(WrongSeriesCount);
MACROCAST_ERROR(FileUnreadable);

// supervised dataset and folds
MACROCAST_ERROR(PanelTooShort);
MACROCAST_ERROR(DatasetTooShort);
MACROCAST_ERROR(DegenerateColumn);

// models
MACROCAST_ERROR(TooFewRows);
MACROCAST_ERROR(DimensionMismatch);
MACROCAST_ERROR(NonFiniteLoss);
MACROCAST_ERROR(MinimumRows);
MACROCAST_ERROR(SingularSystem);
MACROCAST_ERROR(TrainingTooShort);
MACROCAST_ERROR(NonStationaryFit);
MACROCAST_ERROR(RankDeficientExogenous);
MACROCAST_ERROR(HorizonMismatch);

// metrics
MACROCAST_ERROR(NoPredictions);
MACROCAST_ERROR(NonPositiveTestMean);

// harness
MACROCAST_ERROR(ConfigInvalid);
MACROCAST_ERROR(OutputUnwritable);

#undef MACROCAST_ERROR

class PanelUnreadable : public FileUnreadable {
  public:
    using FileUnreadable::FileUnreadable;
    const char* kind() const noexcept override { return "PanelUnreadable"; }
};

/// A (series, month) cell that is absent inside the requested panel window.
struct Hole {
    std::string series;
    MonthStamp month;
};

/// Carries every hole found while balancing a panel, not just the first.
class UnbalancedPanel : public Error {
  public:
    explicit UnbalancedPanel(std::vector<Hole> holes)
        : Error(describe(holes)), holes_(std::move(holes)) {}

    const char* kind() const noexcept override { return "UnbalancedPanel"; }
    const std::vector<Hole>& holes() const { return holes_; }

  private:
    static std::string describe(const std::vector<Hole>& holes) {
        std::string msg = "unbalanced panel, missing cells:";
        for (const Hole& h : holes) {
            msg += " (" + h.series + ", " + to_string(h.month) + ")";
        }
        return msg;
    }

    std::vector<Hole> holes_;
};

}  // namespace macrocast
