#pragma once

#include <cstdint>
#include <utility>

namespace scd {

/// Failure modes surfaced by the numerical kernels and solver drivers.
enum class Fail : std::uint8_t {
    None = 0,
    InvalidInput,
    SingularMatrix,
    QPFailure,
    ResolventFailure,
    LineSearchStall,
};

const char* to_string(Fail f);

/// Value-or-error carrier. Singular systems and QP breakdowns are legitimate
/// branches of the hybrid algorithm, so they travel as values, not exceptions.
template <class T>
class [[nodiscard]] Result {
public:
    Result(T value) : value_(std::move(value)) {}
    Result(Fail f) : fail_(f) {}

    bool ok() const { return fail_ == Fail::None; }
    explicit operator bool() const { return ok(); }
    Fail error() const { return fail_; }

    const T& value() const& { return value_; }
    T& value() & { return value_; }
    T&& take() && { return std::move(value_); }

    const T& operator*() const& { return value_; }
    T& operator*() & { return value_; }
    const T* operator->() const { return &value_; }
    T* operator->() { return &value_; }

private:
    T value_{};
    Fail fail_ = Fail::None;
};

}  // namespace scd
