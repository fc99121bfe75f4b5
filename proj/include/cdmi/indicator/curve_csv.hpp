#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "cdmi/indicator/cdmi.hpp"

namespace cdmi::indicator {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* kCurveCsvHeader = "case_id,alpha_x,alpha_z,m_z,iterations\n";

inline std::string curve_csv_rows(const std::string& case_id, const CdmiCurve& curve) {
  std::string out;
  for (const auto& s : curve.samples) {
    out += case_id + "," + format_g17(s.alpha_x) + "," + format_g17(s.alpha_z) + "," + format_g17(s.m_z) + "," +
           std::to_string(s.iterations) + "\n";
  }
  return out;
}

}  // namespace cdmi::indicator
