#include "scr/errors.hpp"

namespace scr {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_parameter:
        return "invalid-parameter";
    case ErrorKind::parse:
        return "parse";
    case ErrorKind::validation:
        return "validation";
    case ErrorKind::singularity:
        return "singularity";
    case ErrorKind::unstable:
        return "unstable";
    case ErrorKind::convergence:
        return "convergence";
    case ErrorKind::near_resonance:
        return "near-resonance";
    case ErrorKind::no_resonance:
        return "no-resonance";
    }
    return "unknown";
}

bool Error::is_computational() const noexcept {
    switch (kind_) {
    case ErrorKind::singularity:
    case ErrorKind::unstable:
    case ErrorKind::convergence:
    case ErrorKind::near_resonance:
    case ErrorKind::no_resonance:
        return true;
    default:
        return false;
    }
}

}  // namespace scr
