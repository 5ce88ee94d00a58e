// Error taxonomy shared by every module. Two classes matter to callers (and
// to the CLI exit-code contract): validation errors (bad inputs, chart or
// fiducial mix-ups — exit 2) and numerical failures (a computation that was
// asked for but cannot be delivered honestly — exit 3).
#pragma once

#include <stdexcept>
#include <string>

namespace metriq {

enum class ErrorClass { validation, numerical };

class MetriqError : public std::runtime_error {
public:
    MetriqError(ErrorClass cls, std::string kind, const std::string& what)
        : std::runtime_error(what), class_(cls), kind_(std::move(kind)) {}

    ErrorClass error_class() const noexcept { return class_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorClass class_;
    std::string kind_;
};

#define METRIQ_DEFINE_ERROR(NAME, CLASS)                                     \
    class NAME : public MetriqError {                                        \
    public:                                                                  \
        explicit NAME(const std::string& what)                               \
            : MetriqError(ErrorClass::CLASS, #NAME, what) {}                 \
    }

// Validation: the request itself is malformed.
METRIQ_DEFINE_ERROR(InvalidParameter, validation);
METRIQ_DEFINE_ERROR(ChartMismatch, validation);
METRIQ_DEFINE_ERROR(DomainError, validation);
METRIQ_DEFINE_ERROR(NotHermitian, validation);
METRIQ_DEFINE_ERROR(FiducialMismatch, validation);
METRIQ_DEFINE_ERROR(UnsupportedObservable, validation);
METRIQ_DEFINE_ERROR(UnsupportedChart, validation);
METRIQ_DEFINE_ERROR(InvalidSpin, validation);
METRIQ_DEFINE_ERROR(PoleProximity, validation);

// Numerical: the request is well-formed but the computation cannot meet its
// stated guarantees at the given resolution/budget.
METRIQ_DEFINE_ERROR(NumericalOverflow, numerical);
METRIQ_DEFINE_ERROR(TailTruncation, numerical);
METRIQ_DEFINE_ERROR(VarianceBlowup, numerical);
METRIQ_DEFINE_ERROR(EnergyBelowMinimum, numerical);
METRIQ_DEFINE_ERROR(NonSimpleContour, numerical);
METRIQ_DEFINE_ERROR(RootNotBracketed, numerical);

#undef METRIQ_DEFINE_ERROR

} // namespace metriq
