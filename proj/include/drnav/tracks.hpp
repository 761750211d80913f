#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace drnav {

using Vec2 = Eigen::Vector2d;

struct TrackSample {
    double t = 0.0;  // seconds
    Vec2 p = Vec2::Zero();
};

// One pedestrian's recorded trajectory. Times are strictly increasing and a
// track always holds at least two samples.
struct PedestrianTrack {
    int ped_id = -1;
    std::vector<TrackSample> samples;

    double start_time() const { return samples.front().t; }
    double end_time() const { return samples.back().t; }

    // Linear interpolation, clamped to [start_time, end_time].
    Vec2 position_clamped(double t) const;
};

// Parses whitespace-separated rows `frame ped_id x y`. Lines starting with
// '#' are comments. Times are frame / frame_rate.
// Throws std::runtime_error with the offending line number on malformed rows,
// duplicate (frame, ped_id) pairs, non-finite values, tracks with fewer than
// two samples, or an empty payload.
std::vector<PedestrianTrack> parse_tracks(const std::string& text, double frame_rate);

// Inverse of parse_tracks: emits `frame ped_id x y` rows, frames recovered by
// rounding t * frame_rate. Values are printed with round-trip precision.
std::string serialize_tracks(const std::vector<PedestrianTrack>& tracks, double frame_rate);

// All pedestrians whose track time span contains t, with linearly
// interpolated positions. Pedestrians outside their span are absent.
std::vector<std::pair<int, Vec2>> pedestrians_at(const std::vector<PedestrianTrack>& tracks,
                                                 double t);

}  // namespace drnav
