#include "fishdet/error.hpp"

namespace fishdet {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::MalformedConfig: return "MalformedConfig";
        case Errc::UnknownSection: return "UnknownSection";
        case Errc::MissingRequiredKey: return "MissingRequiredKey";
        case Errc::InvalidValue: return "InvalidValue";
        case Errc::DanglingLayerReference: return "DanglingLayerReference";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::HeadFilterMismatch: return "HeadFilterMismatch";
        case Errc::DegenerateClassCount: return "DegenerateClassCount";
        case Errc::UnsupportedHeader: return "UnsupportedHeader";
        case Errc::TruncatedFile: return "TruncatedFile";
        case Errc::TrailingBytes: return "TrailingBytes";
        case Errc::NonFiniteWeight: return "NonFiniteWeight";
        case Errc::EmptyImage: return "EmptyImage";
        case Errc::TargetNotMultipleOf32: return "TargetNotMultipleOf32";
        case Errc::ChannelMismatch: return "ChannelMismatch";
        case Errc::NonFiniteActivation: return "NonFiniteActivation";
        case Errc::InputShapeMismatch: return "InputShapeMismatch";
        case Errc::ChannelCountMismatch: return "ChannelCountMismatch";
        case Errc::InvalidThreshold: return "InvalidThreshold";
        case Errc::EmptyTruthSet: return "EmptyTruthSet";
        case Errc::UndefinedAP: return "UndefinedAP";
        case Errc::NoClassesEvaluated: return "NoClassesEvaluated";
        case Errc::ZeroImages: return "ZeroImages";
        case Errc::InconsistentDims: return "InconsistentDims";
        case Errc::DegenerateMatrix: return "DegenerateMatrix";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::NonFiniteValue: return "NonFiniteValue";
        case Errc::MalformedLine: return "MalformedLine";
        case Errc::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::MissingLabelFile: return "MissingLabelFile";
        case Errc::IoError: return "IoError";
        case Errc::DecodeError: return "DecodeError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

ConfigError::ConfigError(Errc code, std::size_t section, std::string key, const std::string& detail)
    : Error(code, "section " + std::to_string(section) + (key.empty() ? "" : ", key '" + key + "'") +
                      ": " + detail),
      section_(section),
      key_(std::move(key)) {}

WeightsError::WeightsError(Errc code, const std::string& message, std::size_t expected,
                           std::size_t actual, std::size_t layer, std::size_t index)
    : Error(code, message), expected_(expected), actual_(actual), layer_(layer), index_(index) {}

}  // namespace fishdet
