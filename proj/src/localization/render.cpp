#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cotrep/localization.hpp"

namespace cotrep {
namespace {

// Control bytes other than newline and tab are shown as \xNN.
std::string printable(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  char buf[8];
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if ((u < 0x20 && c != '\n' && c != '\t') || u == 0x7f) {
      std::snprintf(buf, sizeof buf, "\\x%02x", u);
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}

std::string html_escape(std::string_view raw) {
  const std::string s = printable(raw);
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::string_view kHtmlHead = R"(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Reasoning salience</title>
<style>
body { font-family: sans-serif; margin: 2em; }
.rationale { font-family: monospace; white-space: pre-wrap; line-height: 1.6; }
.tok.ok { color: #1a7f37; }
.tok.red { color: #000; }
.swatch { display: inline-block; width: 1em; height: 1em; vertical-align: middle; }
.swatch.red { background: rgb(255, 0, 0); }
.swatch.ok { background: #1a7f37; }
</style>
</head>
<body>
)";

}  // namespace

std::string render_salience(const ScoreTrack& track, SalienceFormat format) {
  const std::size_t begin = std::min(track.rationale_start, track.size());
  double floor = 0.0;
  for (std::size_t i = begin; i < track.size(); ++i) floor = std::min(floor, track.clipped[i]);
  auto intensity = [&](double c) { return floor < 0.0 ? std::clamp(c / floor, 0.0, 1.0) : 0.0; };

  std::string out;
  char buf[96];
  if (format == SalienceFormat::kHtml) {
    out += kHtmlHead;
    out += "<p class=\"legend\"><span class=\"swatch red\"></span> ";
    out += kRedLegend;
    out += " &nbsp; <span class=\"swatch ok\"></span> ";
    out += kGreenLegend;
    std::snprintf(buf, sizeof buf, " &nbsp; (&delta; = %g)</p>\n", track.delta);
    out += buf;
    out += "<div class=\"rationale\">";
    for (std::size_t i = begin; i < track.size(); ++i) {
      const double c = track.clipped[i];
      if (c < 0.0) {
        std::snprintf(buf, sizeof buf,
                      "<span class=\"tok red\" style=\"background-color: rgba(255, 0, 0, %.3f)\">",
                      intensity(c));
        out += buf;
      } else {
        out += "<span class=\"tok ok\">";
      }
      out += html_escape(track.token_pieces[i]);
      out += "</span>";
    }
    out += "</div>\n</body>\n</html>\n";
    return out;
  }

  out += "\x1b[38;2;220;0;0m";
  out += kRedLegend;
  out += "\x1b[0m  \x1b[38;2;0;150;0m";
  out += kGreenLegend;
  out += "\x1b[0m\n";
  for (std::size_t i = begin; i < track.size(); ++i) {
    const double c = track.clipped[i];
    if (c < 0.0) {
      const int fade = static_cast<int>(std::lround(220.0 * (1.0 - intensity(c))));
      std::snprintf(buf, sizeof buf, "\x1b[48;2;255;%d;%dm", fade, fade);
    } else {
      std::snprintf(buf, sizeof buf, "\x1b[38;2;0;150;0m");
    }
    out += buf;
    out += printable(track.token_pieces[i]);
    out += "\x1b[0m";
  }
  out += "\n";
  return out;
}

}  // namespace cotrep
