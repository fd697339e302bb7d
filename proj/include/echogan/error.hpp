#pragma once

#include <stdexcept>
#include <string>

namespace echogan {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A mask pixel outside the label alphabet {0,1,2,3}.
class CorruptLabel : public Error {
public:
    explicit CorruptLabel(int value, const std::string& where = {})
        : Error("corrupt label value " + std::to_string(value) +
                (where.empty() ? std::string{} : " in " + where)),
          value_(value) {}

    int value() const noexcept { return value_; }

private:
    int value_;
};

class InvalidDimensions : public Error {
public:
    using Error::Error;
};

class InvalidSplit : public Error {
public:
    using Error::Error;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class IncompatibleCheckpoint : public Error {
public:
    using Error::Error;
};

class ModelNotLoaded : public Error {
public:
    using Error::Error;
};

/// A loss term became NaN or infinite during training.
class DivergenceError : public Error {
public:
    DivergenceError(long iteration, std::string term)
        : Error("non-finite " + term + " at iteration " + std::to_string(iteration)),
          iteration_(iteration),
          term_(std::move(term)) {}

    long iteration() const noexcept { return iteration_; }
    const std::string& term() const noexcept { return term_; }

private:
    long iteration_;
    std::string term_;
};

}  // namespace echogan
