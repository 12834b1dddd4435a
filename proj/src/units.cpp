#include "pwg/units.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <stdexcept>

namespace pwg::units {
namespace {

// Splits "4.98 GHz" into the numeric part and the (possibly empty) suffix.
std::pair<double, std::string> split(const std::string& text) {
    size_t begin = text.find_first_not_of(" \t");
    if (begin == std::string::npos)
        throw std::invalid_argument("empty quantity: '" + text + "'");
    size_t end = begin;
    auto numeric = [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
               c == '.' || c == 'e' || c == 'E';
    };
    // 'e' belongs to the number only when part of an exponent, not a unit ("eV").
    while (end < text.size() && numeric(text[end])) {
        if ((text[end] == 'e' || text[end] == 'E') &&
            !(end + 1 < text.size() &&
              (std::isdigit(static_cast<unsigned char>(text[end + 1])) ||
               text[end + 1] == '+' || text[end + 1] == '-')))
            break;
        ++end;
    }
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + end, value);
    if (ec != std::errc{} || ptr != text.data() + end)
        throw std::invalid_argument("bad numeric value in '" + text + "'");
    size_t ub = text.find_first_not_of(" \t", end);
    size_t ue = text.find_last_not_of(" \t");
    std::string unit = ub == std::string::npos ? "" : text.substr(ub, ue - ub + 1);
    return {value, unit};
}

double convert(const std::string& text, const std::map<std::string, double>& scales,
               const char* kind) {
    auto [value, unit] = split(text);
    auto it = scales.find(unit);
    if (it == scales.end())
        throw std::invalid_argument(std::string("expected a ") + kind +
                                    " with unit suffix, got '" + text + "'");
    return value * it->second;
}

}  // namespace

double angular_frequency(const std::string& text) {
    static const std::map<std::string, double> scales = {
        {"Hz", two_pi},       {"kHz", two_pi * 1e3}, {"MHz", two_pi * 1e6},
        {"GHz", two_pi * 1e9}, {"rad/s", 1.0},
    };
    return convert(text, scales, "frequency");
}

double duration(const std::string& text) {
    static const std::map<std::string, double> scales = {
        {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12},
    };
    return convert(text, scales, "duration");
}

double energy(const std::string& text) {
    static const std::map<std::string, double> scales = {
        {"J", 1.0},   {"mJ", 1e-3}, {"uJ", 1e-6}, {"nJ", 1e-9},
        {"pJ", 1e-12}, {"fJ", 1e-15}, {"aJ", 1e-18},
    };
    return convert(text, scales, "energy");
}

double length(const std::string& text) {
    static const std::map<std::string, double> scales = {
        {"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9},
    };
    return convert(text, scales, "length");
}

double velocity(const std::string& text) {
    static const std::map<std::string, double> scales = {{"m/s", 1.0}};
    return convert(text, scales, "velocity");
}

double dimensionless(const std::string& text) {
    auto [value, unit] = split(text);
    if (!unit.empty())
        throw std::invalid_argument("expected a plain number, got '" + text + "'");
    return value;
}

}  // namespace pwg::units
