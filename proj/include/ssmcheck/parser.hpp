#pragma once

#include <string>

#include "ssmcheck/model.hpp"

namespace ssmcheck {

// Parses model text. Throws Error(Parse) on malformed input. The returned
// model is resolved; name-resolution problems are reported as Error(Parse)
// with the offending position.
SystemModel parseModel(const std::string& text, const std::string& name = "model");

// Reads and parses a model file; the model name is the file stem.
// Throws Error(Usage) if the file cannot be read.
SystemModel loadModel(const std::string& path);

// Renders a model in the concrete syntax. Declared-but-unmaterialized failure
// modes print as declarations; materialized ones are part of the automata.
// For models straight from the parser, parse(printModel(m)) is structurally
// identical to m.
std::string printModel(const SystemModel& model);

// "10ms" -> 0.01 and friends. Throws Error(Parse) on bad syntax.
double parseDurationSeconds(const std::string& text);

// "1e-2/h" -> 0.01; other units are normalized to per-hour.
double parseRatePerHour(const std::string& text);

// Shortest decimal form that parses back to exactly the same double.
std::string formatDouble(double value);

} // namespace ssmcheck
