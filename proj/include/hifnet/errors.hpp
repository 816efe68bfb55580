#pragma once

#include <stdexcept>
#include <string>

namespace hifnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration, parameters or specs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Tensor / layer shape disagreement.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Base for problems with on-disk artifacts (datasets, checkpoints).
class DataError : public Error {
public:
    using Error::Error;
};

class VersionError : public DataError {
public:
    using DataError::DataError;
};

class TruncatedError : public DataError {
public:
    using DataError::DataError;
};

class ChecksumError : public DataError {
public:
    using DataError::DataError;
};

/// Checkpoint architecture does not match the requested spec.
class FingerprintError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch, int batch)
        : Error(what), epoch_(epoch), batch_(batch) {}

    int epoch() const { return epoch_; }
    int batch() const { return batch_; }

private:
    int epoch_;
    int batch_;
};

} // namespace hifnet
