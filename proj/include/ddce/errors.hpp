// Exception types shared across the library.
#ifndef DDCE_ERRORS_HPP
#define DDCE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ddce {

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct BadDims : std::runtime_error {
    explicit BadDims(const std::string& what) : std::runtime_error(what) {}
};

struct BadLength : std::runtime_error {
    explicit BadLength(const std::string& what) : std::runtime_error(what) {}
};

struct DimMismatch : std::runtime_error {
    explicit DimMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct SearchBudgetExceeded : std::runtime_error {
    explicit SearchBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct WrongCode : std::runtime_error {
    explicit WrongCode(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownPredictor : std::runtime_error {
    explicit UnknownPredictor(const std::string& what) : std::runtime_error(what) {}
};

struct MissingModel : std::runtime_error {
    explicit MissingModel(const std::string& what) : std::runtime_error(what) {}
};

// Model file I/O failures.
struct BadMagic : std::runtime_error {
    explicit BadMagic(const std::string& what) : std::runtime_error(what) {}
};

struct VersionMismatch : std::runtime_error {
    explicit VersionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct CorruptPayload : std::runtime_error {
    explicit CorruptPayload(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ddce

#endif
