#include "drnav/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace drnav {

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
    throw std::runtime_error("track parse error at line " + std::to_string(line_no) + ": " + what);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Vec2 PedestrianTrack::position_clamped(double t) const {
    if (t <= samples.front().t) return samples.front().p;
    if (t >= samples.back().t) return samples.back().p;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const TrackSample& s) { return v < s.t; });
    const TrackSample& hi = *it;
    const TrackSample& lo = *(it - 1);
    double w = (t - lo.t) / (hi.t - lo.t);
    return lo.p + w * (hi.p - lo.p);
}

std::vector<PedestrianTrack> parse_tracks(const std::string& text, double frame_rate) {
    if (!(frame_rate > 0.0)) throw std::runtime_error("frame_rate must be positive");

    std::map<int, std::vector<std::pair<long long, Vec2>>> rows_by_ped;
    std::set<std::pair<long long, int>> seen;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int data_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        long long frame;
        int ped_id;
        double x, y;
        if (!(ls >> frame)) {
            std::string leftover;
            if (ls.clear(), ls >> leftover) parse_fail(line_no, "expected integer frame");
            continue;  // blank / comment-only line
        }
        if (!(ls >> ped_id >> x >> y)) parse_fail(line_no, "expected `frame ped_id x y`");
        std::string extra;
        if (ls >> extra) parse_fail(line_no, "trailing token '" + extra + "'");
        if (!std::isfinite(x) || !std::isfinite(y)) parse_fail(line_no, "non-finite position");
        if (!seen.insert({frame, ped_id}).second)
            parse_fail(line_no, "duplicate (frame, ped_id) = (" + std::to_string(frame) + ", " +
                                    std::to_string(ped_id) + ")");
        rows_by_ped[ped_id].push_back({frame, Vec2(x, y)});
        ++data_rows;
    }
    if (data_rows == 0) throw std::runtime_error("track payload contains no data rows");

    std::vector<PedestrianTrack> tracks;
    tracks.reserve(rows_by_ped.size());
    for (auto& [ped_id, rows] : rows_by_ped) {
        if (rows.size() < 2)
            throw std::runtime_error("pedestrian " + std::to_string(ped_id) +
                                     " has fewer than 2 samples");
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        PedestrianTrack track;
        track.ped_id = ped_id;
        track.samples.reserve(rows.size());
        for (const auto& [frame, p] : rows)
            track.samples.push_back({static_cast<double>(frame) / frame_rate, p});
        tracks.push_back(std::move(track));
    }
    return tracks;
}

std::string serialize_tracks(const std::vector<PedestrianTrack>& tracks, double frame_rate) {
    std::string out;
    for (const auto& track : tracks) {
        for (const auto& s : track.samples) {
            long long frame = std::llround(s.t * frame_rate);
            out += std::to_string(frame) + " " + std::to_string(track.ped_id) + " " +
                   format_double(s.p.x()) + " " + format_double(s.p.y()) + "\n";
        }
    }
    return out;
}

std::vector<std::pair<int, Vec2>> pedestrians_at(const std::vector<PedestrianTrack>& tracks,
                                                 double t) {
    std::vector<std::pair<int, Vec2>> out;
    for (const auto& track : tracks) {
        if (t < track.start_time() || t > track.end_time()) continue;
        out.push_back({track.ped_id, track.position_clamped(t)});
    }
    return out;
}

}  // namespace drnav
