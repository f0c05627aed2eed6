#include "adling/interpret/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "adling/error.hpp"

namespace adling::interpret {
namespace {

constexpr char kGlyphs[] = {' ', '.', ':', '*', '#'};

std::string escape_xml(std::string_view s) {
  std::string out;
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

std::string caption(const SaliencyMap& map) {
  std::string c = "predicted=" + std::string(corpus::to_string(static_cast<corpus::Label>(map.predicted_class))) +
                  " target=" + std::string(corpus::to_string(static_cast<corpus::Label>(map.target_class))) +
                  " score=" + std::string(to_string(map.kind));
  if (map.utterance) c = map.utterance->transcript_id + "_" + std::to_string(map.utterance->index) + " " + c;
  return c;
}

// Single red hue; opacity carries the intensity.
std::string fill(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "rgba(200,30,30,%.3f)", v);
  return buf;
}

}  // namespace

HeatmapFormat parse_heatmap_format(std::string_view text) {
  if (text == "text") return HeatmapFormat::text;
  if (text == "html") return HeatmapFormat::html;
  if (text == "svg") return HeatmapFormat::svg;
  throw UsageError("unknown heatmap format '" + std::string(text) + "' (expected text, html or svg)");
}

std::string_view extension(HeatmapFormat format) {
  switch (format) {
    case HeatmapFormat::text: return "txt";
    case HeatmapFormat::html: return "html";
    case HeatmapFormat::svg: return "svg";
  }
  return "txt";
}

std::vector<double> normalize_scores(std::span<const double> scores) {
  if (scores.empty()) return {};
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size(), 0.5);
  if (*hi > *lo) {
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - *lo) / (*hi - *lo);
  }
  return out;
}

std::size_t intensity_bucket(double normalized) {
  return std::min<std::size_t>(4, static_cast<std::size_t>(std::floor(std::clamp(normalized, 0.0, 1.0) * 5.0)));
}

std::string render_heatmap(const SaliencyMap& map, HeatmapFormat format) {
  const std::vector<double> raw = map.scores();
  const std::vector<double> norm = normalize_scores(raw);
  std::string out;
  char buf[256];
  switch (format) {
    case HeatmapFormat::text: {
      out = "# " + caption(map) + "\n";
      for (std::size_t i = 0; i < map.tokens.size(); ++i) {
        const std::size_t b = intensity_bucket(norm[i]);
        std::snprintf(buf, sizeof buf, "%c %zu %.6f\t%s\n", kGlyphs[b], b, raw[i], map.tokens[i].token.c_str());
        out += buf;
      }
      break;
    }
    case HeatmapFormat::html: {
      out = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + escape_xml(caption(map)) +
            "</title></head>\n<body>\n<p>\n";
      for (std::size_t i = 0; i < map.tokens.size(); ++i) {
        const bool pos = map.tokens[i].kind == corpus::TokenKind::pos;
        std::snprintf(buf, sizeof buf, "<span class=\"%s\" title=\"%.6f\" style=\"background:%s\">", pos ? "pos" : "word",
                      raw[i], fill(norm[i]).c_str());
        out += buf + escape_xml(map.tokens[i].token) + "</span>\n";
      }
      out += "</p>\n<p><small>" + escape_xml(caption(map)) + "</small></p>\n</body></html>\n";
      break;
    }
    case HeatmapFormat::svg: {
      std::vector<double> x;
      double width = 10;
      for (const TokenScore& t : map.tokens) {
        x.push_back(width);
        width += 8.0 * static_cast<double>(t.token.size()) + 12.0;
      }
      std::snprintf(buf, sizeof buf,
                    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"60\" font-family=\"monospace\" "
                    "font-size=\"13\">\n",
                    std::max(width, 320.0));
      out = buf;
      for (std::size_t i = 0; i < map.tokens.size(); ++i) {
        const double w = 8.0 * static_cast<double>(map.tokens[i].token.size()) + 8.0;
        std::snprintf(buf, sizeof buf, "<rect x=\"%.0f\" y=\"8\" width=\"%.0f\" height=\"22\" fill=\"%s\"/>\n", x[i], w,
                      fill(norm[i]).c_str());
        out += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"24\">", x[i] + 4);
        out += buf + escape_xml(map.tokens[i].token) + "</text>\n";
      }
      out += "<text x=\"10\" y=\"50\" font-size=\"11\">" + escape_xml(caption(map)) + "</text>\n</svg>\n";
      break;
    }
  }
  return out;
}

std::string heatmap_filename(const SaliencyMap& map, HeatmapFormat format) {
  const std::string stem = map.utterance ? map.utterance->transcript_id + "_" + std::to_string(map.utterance->index)
                                         : std::string("utterance");
  return stem + "." + std::string(extension(format));
}

}  // namespace adling::interpret
