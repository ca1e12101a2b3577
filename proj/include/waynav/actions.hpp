#pragma once

namespace waynav {

// Low-level action space: fixed-magnitude turn-then-move controls.
enum class LowLevelAction { Forward, TurnLeft, TurnRight, Stop };

constexpr double kForwardStepM = 0.25;
constexpr double kTurnStepDeg = 15.0;

inline const char* to_string(LowLevelAction a) {
  switch (a) {
    case LowLevelAction::Forward: return "forward";
    case LowLevelAction::TurnLeft: return "turn_left";
    case LowLevelAction::TurnRight: return "turn_right";
    case LowLevelAction::Stop: return "stop";
  }
  return "unknown";
}

enum class MotionMode { Sliding, NoSliding };

inline const char* to_string(MotionMode m) {
  return m == MotionMode::Sliding ? "sliding" : "no-sliding";
}

}  // namespace waynav
