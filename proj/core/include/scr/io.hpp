#pragma once

// File formats.
//
// Designs, references, lever arms and reports are JSON with unit-suffixed
// keys (c_a_fF, l_nH, ...). Traces and sweeps are CSV. Numbers are written in
// shortest round-trip form so documents are byte-stable across runs.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scr/circuit.hpp"
#include "scr/electrons.hpp"
#include "scr/material.hpp"
#include "scr/resonance.hpp"
#include "scr/verify.hpp"

namespace scr::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

// ---- designs -----------------------------------------------------------------
//
// Either a top-level array of design objects or {"designs": [...]}. Keys:
//   name, length_mm, width_um, c_a_fF, c_b_fF, c_x_fF, c_ca_fF, c_cb_fF,
//   l_nH (or l_sq_pH to derive L from the geometry), l_t_nH.
// c_x_fF, c_ca_fF, c_cb_fF and l_t_nH default to 0.

std::vector<CircuitDesign> parse_designs(std::string_view text,
                                         std::string_view source = "<designs>");
std::vector<CircuitDesign> load_designs(const std::filesystem::path& path);
std::string designs_to_json(const std::vector<CircuitDesign>& designs);

// ---- traces ------------------------------------------------------------------

enum class TraceFormat { automatic, re_im, db_phase };

TraceFormat parse_trace_format(std::string_view text);

S21Trace parse_trace(std::string_view text, TraceFormat format = TraceFormat::automatic,
                     std::string_view source = "<trace>");
S21Trace load_trace(const std::filesystem::path& path, TraceFormat format = TraceFormat::automatic);
std::string trace_to_csv(const S21Trace& trace);

// ---- references and lever arms -----------------------------------------------
//
// References: {"references": [{"name": "R1", "mode": "differential",
//   "f_GHz": 3.62}, ...]}; f_Hz is accepted instead of f_GHz.
// Lever arms: {"electrons": [{"da_dx_per_um": 0.25, "db_dx_per_um": -0.25,
//   "da_dy_per_um": 0, "db_dy_per_um": 0}, ...]}.

ReferenceMap parse_references(std::string_view text, std::string_view source = "<references>");
ReferenceMap load_references(const std::filesystem::path& path);
std::string references_to_json(const ReferenceMap& references);

LeverArms parse_lever_arms(std::string_view text, std::string_view source = "<lever arms>");
LeverArms load_lever_arms(const std::filesystem::path& path);

// ---- output documents --------------------------------------------------------

std::string modes_to_csv(const std::vector<FamilyModes>& family);
std::string modes_to_json(const std::vector<FamilyModes>& family, double gamma);

std::string report_to_json(const VerificationReport& report);
std::string report_to_csv(const VerificationReport& report);

std::string fit_to_json(const std::vector<std::pair<std::string, ResonanceFit>>& fits);

std::string sweep_to_csv(const std::vector<SweepPoint>& sweep);

std::string scaling_to_json(const ScalingBase& base, const Geometry& target,
                            const ScalingPrediction& prediction);

}  // namespace scr::io
