// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace psd {

/// Division by a vanishing denominator in a transfer or impedance formula.
class singularity_error : public std::runtime_error {
public:
    explicit singularity_error(const std::string& what) : std::runtime_error(what) {}
};

/// Operating point too close to the negative-capacitance stability pole.
class pole_error : public std::runtime_error {
public:
    explicit pole_error(const std::string& what) : std::runtime_error(what) {}
};

/// The finite-gain feedback denominator vanished (circuit unstable).
class instability_error : public std::runtime_error {
public:
    explicit instability_error(const std::string& what) : std::runtime_error(what) {}
};

/// Threshold calibration failed (phase field inconsistent with the model).
class calibration_error : public std::runtime_error {
public:
    explicit calibration_error(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario file could not be parsed or validated.
class scenario_error : public std::runtime_error {
public:
    explicit scenario_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace psd
