#include <algorithm>
#include <cstdio>

#include "cvqa/explain.hpp"

namespace cvqa::explain {

namespace {

// Fixed three-decimal rendering with trailing zeros removed.
std::string number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

std::string xml_escape(std::string_view in) {
    std::string out;
    for (char c : in) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_overlay_svg(const Explanation& e, int width_px, int height_px) {
    const int w = std::max(width_px, 1);
    const int h = std::max(height_px, 1);
    double max_saliency = 0.0;
    for (const auto& item : e.evidence) max_saliency = std::max(max_saliency, item.saliency);

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n";
    for (const auto& item : e.evidence) {
        const auto& b = item.detection.box;
        const double opacity = max_saliency > 0.0 ? item.saliency / max_saliency : 0.0;
        const std::string x = number(b.x1 * w);
        const std::string y = number(b.y1 * h);
        svg += "  <rect x=\"" + x + "\" y=\"" + y + "\" width=\"" + number((b.x2 - b.x1) * w) + "\" height=\"" +
               number((b.y2 - b.y1) * h) + "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"3\" stroke-opacity=\"" +
               number(opacity) + "\"/>\n";
        std::string label = item.detection.label + " (" + number(item.detection.confidence) + ")";
        svg += "  <text x=\"" + x + "\" y=\"" + y +
               "\" dy=\"1em\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#d62728\">" + xml_escape(label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace cvqa::explain
