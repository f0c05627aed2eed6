#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adling/interpret/saliency.hpp"

namespace adling::interpret {

enum class HeatmapFormat { text, html, svg };

HeatmapFormat parse_heatmap_format(std::string_view text);  // throws UsageError
std::string_view extension(HeatmapFormat format);           // "txt", "html", "svg"

/// Min-max normalization to [0, 1]; all-equal scores map to 0.5.
std::vector<double> normalize_scores(std::span<const double> scores);

/// Intensity bucket 0..4 of a normalized score.
std::size_t intensity_bucket(double normalized);

std::string render_heatmap(const SaliencyMap& map, HeatmapFormat format);

/// `<transcript_id>_<index>.<ext>`
std::string heatmap_filename(const SaliencyMap& map, HeatmapFormat format);

}  // namespace adling::interpret
