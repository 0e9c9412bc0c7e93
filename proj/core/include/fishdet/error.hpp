#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fishdet {

enum class Errc {
    // model-io
    MalformedConfig,
    UnknownSection,
    MissingRequiredKey,
    InvalidValue,
    DanglingLayerReference,
    ShapeMismatch,
    HeadFilterMismatch,
    DegenerateClassCount,
    UnsupportedHeader,
    TruncatedFile,
    TrailingBytes,
    NonFiniteWeight,
    // tensor-engine
    EmptyImage,
    TargetNotMultipleOf32,
    ChannelMismatch,
    NonFiniteActivation,
    InputShapeMismatch,
    // detection-head
    ChannelCountMismatch,
    InvalidThreshold,
    // metrics
    EmptyTruthSet,
    UndefinedAP,
    NoClassesEvaluated,
    ZeroImages,
    // probe-pca
    InconsistentDims,
    DegenerateMatrix,
    IndexOutOfRange,
    NonFiniteValue,
    // dataset-pipeline
    MalformedLine,
    OutOfRangeCoordinate,
    EmptyDataset,
    MissingLabelFile,
    // generic
    IoError,
    DecodeError,
};

std::string_view to_string(Errc code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }
    /// The message without the leading error-code name.
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

/// Raised while parsing a network definition. `section` counts from 0 for
/// `[net]`, so for layer sections it equals the 1-based layer number.
class ConfigError : public Error {
public:
    ConfigError(Errc code, std::size_t section, std::string key, const std::string& detail);

    std::size_t section() const noexcept { return section_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::size_t section_;
    std::string key_;
};

class WeightsError : public Error {
public:
    WeightsError(Errc code, const std::string& message, std::size_t expected = 0,
                 std::size_t actual = 0, std::size_t layer = 0, std::size_t index = 0);

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }
    std::size_t layer() const noexcept { return layer_; }
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t expected_;
    std::size_t actual_;
    std::size_t layer_;
    std::size_t index_;
};

}  // namespace fishdet
