#ifndef UFRBF_ERROR_HPP
#define UFRBF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ufrbf {

/// Invalid user-supplied parameter (negative radius, q < 1, unknown name, ...).
class ParameterError : public std::invalid_argument
{
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical stage failed: singular stencil matrix, rank deficiency,
/// non-convergence. `module()` names the stage that raised it.
class NumericalError : public std::runtime_error
{
public:
    NumericalError(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module))
    {
    }

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Iterative estimator gave up; the best estimate so far is attached.
class ConvergenceError : public NumericalError
{
public:
    ConvergenceError(std::string module, const std::string& what, double best_estimate)
        : NumericalError(std::move(module), what), best_estimate_(best_estimate)
    {
    }

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

} // namespace ufrbf

#endif // UFRBF_ERROR_HPP
