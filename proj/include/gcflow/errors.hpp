#pragma once

#include <stdexcept>
#include <string>

namespace gcflow {

struct NonConvexError : std::runtime_error {
    explicit NonConvexError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonAdmissibleError : std::runtime_error {
    explicit NonAdmissibleError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularWError : std::runtime_error {
    explicit SingularWError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DtUnderflowError : std::runtime_error {
    explicit DtUnderflowError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NaNDetectedError : std::runtime_error {
    explicit NaNDetectedError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GhostLayerError : std::runtime_error {
    explicit GhostLayerError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InitialDataIncompatibleError : std::runtime_error {
    explicit InitialDataIncompatibleError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientDecayWindowError : std::runtime_error {
    explicit InsufficientDecayWindowError(const std::string& msg) : std::runtime_error(msg) {}
};

// Config parsing errors carry the offending key in the message.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gcflow
