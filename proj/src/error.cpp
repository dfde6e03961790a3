#include "ssr/error.hpp"

namespace ssr {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidImage: return "InvalidImage";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::DegenerateImage: return "DegenerateImage";
        case ErrorKind::DegenerateHistogram: return "DegenerateHistogram";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::EmptyRegion: return "EmptyRegion";
        case ErrorKind::NoValidCrop: return "NoValidCrop";
        case ErrorKind::NoClutterMass: return "NoClutterMass";
        case ErrorKind::EmptyPopulation: return "EmptyPopulation";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::Format: return "FormatError";
    }
    return "Error";
}

} // namespace ssr
