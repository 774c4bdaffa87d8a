#pragma once

#include <stdexcept>
#include <string>

namespace covbound
{

/// Error targets handed to the numerical routines.
struct Tolerance
{
    double rel_err = 1e-10;
    double abs_err = 1e-8;
};

void validate(const Tolerance& tol);

class InvalidArgument : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an adaptive rule runs out of panels before meeting its target.
class QuadratureError : public std::runtime_error
{
  public:
    QuadratureError(const std::string& what, double estimate, double achieved_err)
        : std::runtime_error(what), estimate_(estimate), achieved_err_(achieved_err)
    {
    }

    double estimate() const noexcept { return estimate_; }
    double achieved_err() const noexcept { return achieved_err_; }

  private:
    double estimate_;
    double achieved_err_;
};

/// The requested quantity has no meaning for the given selection method.
class NotApplicable : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

} // namespace covbound
