#pragma once
#include <stdexcept>
#include <string>

namespace levym {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SigmaNotPositive : Error {
    explicit SigmaNotPositive(double sigma)
        : Error("sigma must be > 0, got " + std::to_string(sigma)) {}
};

struct NegativeIntensity : Error {
    explicit NegativeIntensity(double lambda)
        : Error("jump intensity must be >= 0, got " + std::to_string(lambda)) {}
};

struct MassAtZero : Error {
    MassAtZero() : Error("jump-size law must put no mass at z = 0") {}
};

struct BadLawParams : Error {
    explicit BadLawParams(const std::string& what) : Error("bad jump-law parameters: " + what) {}
};

struct TNotOnGrid : Error {
    explicit TNotOnGrid(double t) : Error("time " + std::to_string(t) + " is not a grid node") {}
};

struct OrderTooLarge : Error {
    explicit OrderTooLarge(int n)
        : Error("chaos order " + std::to_string(n) + " exceeds the supported cap (6)") {}
};

struct FourierTailTooHeavy : Error {
    explicit FourierTailTooHeavy(const std::string& what)
        : Error("Fourier quadrature failed to meet tolerance: " + what) {}
};

struct ExtrapolationBeyondTable : Error {
    explicit ExtrapolationBeyondTable(const std::string& what)
        : Error("tail-table lookup outside tabulated range: " + what) {}
};

struct InnerBudgetZero : Error {
    InnerBudgetZero() : Error("nested Monte Carlo requested with a zero inner budget") {}
};

struct UnsupportedVariant : Error {
    explicit UnsupportedVariant(const std::string& what)
        : Error("operation not supported for this functional variant: " + what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& key, const std::string& what)
        : Error("config error at key '" + key + "': " + what), key(key) {}
    std::string key;
};

}  // namespace levym
