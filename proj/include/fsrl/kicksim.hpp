#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fsrl/approx.hpp"
#include "fsrl/drl.hpp"
#include "fsrl/random.hpp"

namespace fsrl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const noexcept { return {x * k, y * k}; }
  double dot(Vec2 o) const noexcept { return x * o.x + y * o.y; }
  double norm() const noexcept { return std::hypot(x, y); }
  double angle() const noexcept { return std::atan2(y, x); }
  bool operator==(const Vec2&) const = default;
};

struct Pose {
  Vec2 position;
  double heading = 0.0;  // rad
  bool operator==(const Pose&) const = default;
};

/// Field centered at the origin; the attacked goal line is x = +length/2.
struct FieldGeometry {
  double length = 9000.0;  // mm
  double width = 6000.0;
  double goalWidth = 1500.0;
  double ballStartDistance = 1500.0;   // ball to goal line
  double robotStartDistance = 1000.0;  // robot to ball

  double goal_line_x() const noexcept { return 0.5 * length; }
  Vec2 target() const noexcept { return {goal_line_x(), 0.0}; }
  Vec2 ball_start() const noexcept { return {goal_line_x() - ballStartDistance, 0.0}; }
  bool contains(Vec2 p) const noexcept {
    return std::abs(p.x) <= 0.5 * length && std::abs(p.y) <= 0.5 * width;
  }
};

enum class StateModel {
  Proposed,  // phase-synchronized, center frame, phaseType bit
  Legacy,    // fixed control period, nearest-foot frame, no phaseType
};

std::string_view state_model_name(StateModel m) noexcept;  // "proposed" | "legacy"
StateModel parse_state_model(std::string_view name);

struct KickSimConfig {
  FieldGeometry field;
  double phaseDuration = 0.25;        // s, one half-step
  double legacyControlPeriod = 0.1;   // s
  double timeout = 200.0;             // s of simulated time
  double kappa = 8.0;                 // launch gain
  double frictionDecel = 300.0;       // mm/s^2
  double robotRadius = 150.0;         // mm
  double ballRadius = 50.0;           // mm
  double footOffset = 50.0;           // mm, lateral, legacy selector only
  double vxMin = 0.0;                 // commanded velocity box, mm/s
  double vxMax = 120.0;
  double vyMax = 70.0;                // symmetric
  double vthetaMaxDeg = 30.0;         // symmetric, deg/s
  double rhoMax = 800.0;              // mm
  double gammaMaxDeg = 70.0;
  double phiMaxDeg = 90.0;
  int rhoCores = 15;
  int gammaCores = 11;
  int phiCores = 13;
  double rewardK = 50.0;
  double psi0 = 300.0;                // mm
  double alpha0Deg = 14.0;

  void validate() const;

  /// Half-angle of the goal mouth seen from the ball's start position.
  double max_goal_angle_deg() const noexcept;
};

struct Observation {
  StateModel model = StateModel::Proposed;
  double rho = 0.0;       // mm, clamped to [0, rhoMax]
  double gammaDeg = 0.0;  // clamped to +-gammaMax
  double phiDeg = 0.0;    // clamped to +-phiMax, sign preserved
  int phaseType = 0;      // proposed model only
  double rawRho = 0.0;
  double rawGammaDeg = 0.0;
  double rawPhiDeg = 0.0;
};

/// Learner input for `obs`. Throws ConfigError if the observation was
/// produced under a different state model than `expected`.
std::vector<double> state_vector(const Observation& obs, StateModel expected);

/// Grids for the given state model: rho x15, gamma x11, phi x13 (+ binary).
StateSpace make_state_space(StateModel model, const KickSimConfig& cfg = {});

struct BallState {
  Vec2 position;
  Vec2 velocity;
  double radius = 50.0;
  bool touched = false;

  double speed() const noexcept { return velocity.norm(); }

  /// Rolls for dt seconds under constant deceleration until rest.
  void advance(double dt, double frictionDecel) noexcept;
};

enum class Termination { None, Timeout, RobotOut, BallOut, BallTouched };

std::string_view termination_name(Termination t) noexcept;

struct KickOutcome {
  Vec2 launchDirection;
  double launchSpeed = 0.0;    // mm/s
  double travel = 0.0;         // mm, distance to rest
  Vec2 restPoint;
  double psiError = 0.0;       // mm
  double alphaErrorDeg = 0.0;
  double distanceError = 1.0;  // [0, 1]
  double angleError = 0.0;     // >= 0
  bool goal = false;           // crossed the goal line between the posts
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool terminal = false;
  Termination reason = Termination::None;
  std::optional<KickOutcome> kick;
};

/// Exact pose after applying a constant robot-frame twist for dt seconds.
Pose integrate_twist(const Pose& pose, const VelocityCommand& cmd, double dt) noexcept;

/// Robot-frame velocity rotated into the world frame at the pose's heading.
Vec2 world_velocity(const Pose& pose, const VelocityCommand& cmd) noexcept;

/// First time in [0, dt] at which the robot body touches the (resting) ball,
/// if any.
std::optional<double> first_contact(const Pose& pose, const VelocityCommand& cmd, Vec2 ball,
                                    double dt, double contactDistance);

/// Launches the ball along robot->ball with speed kappa * max(0, v . u).
BallState contact_resolve(const Pose& robotAtContact, const VelocityCommand& cmd,
                          const BallState& ball, const KickSimConfig& cfg);

/// Shot metrics from the ball state right after launch.
KickOutcome evaluate_kick(const BallState& launched, const KickSimConfig& cfg);

double kick_reward(const KickOutcome& kick, const KickSimConfig& cfg);
double approach_reward(const Observation& obs, const KickSimConfig& cfg);

/// Geometric features seen from `origin` with the robot's heading.
Observation observe_from(Vec2 origin, double heading, Vec2 ball, Vec2 target, int phaseType,
                         StateModel model, const KickSimConfig& cfg);

enum class Foot { Left, Right };

Vec2 foot_position(const Pose& pose, Foot foot, double offset) noexcept;

/// Nearest foot to the ball; equal distances select the left foot.
Foot select_foot(const Pose& pose, Vec2 ball, double offset) noexcept;

/// BallTouched, then RobotOut, then BallOut, then Timeout.
Termination terminal_check(bool touched, const Pose& robot, const BallState& ball,
                           double elapsedSeconds, const KickSimConfig& cfg);

/// 2D kinematic in-walk-kick world. The walk engine latches the requested
/// command at every phase boundary; in the proposed model each step spans
/// exactly one phase, in the legacy model a fixed control period.
class KickWorld {
 public:
  explicit KickWorld(KickSimConfig cfg = {}, StateModel model = StateModel::Proposed);

  Observation reset(Rng& rng);

  /// Deterministic placement for tests; the ball returns to its start.
  Observation reset_to(const Pose& robot, int phaseType);

  /// Throws ProtocolError after the episode has terminated.
  StepResult step(const VelocityCommand& cmd);

  Observation observe() const;

  const KickSimConfig& config() const noexcept { return cfg_; }
  StateModel model() const noexcept { return model_; }
  const Pose& robot() const noexcept { return robot_; }
  const BallState& ball() const noexcept { return ball_; }
  int phase_type() const noexcept { return phaseType_; }
  std::int64_t phase_index() const noexcept { return phaseIndex_; }
  double elapsed_seconds() const noexcept { return static_cast<double>(elapsedUs_) * 1e-6; }
  bool terminated() const noexcept { return terminated_; }
  const VelocityCommand& latched_command() const noexcept { return latched_; }

  /// Step bound implied by the timeout: ceil(timeout / control period).
  int max_steps() const noexcept;

 private:
  void advance(std::int64_t durationUs);

  KickSimConfig cfg_;
  StateModel model_;
  Pose robot_;
  BallState ball_;
  VelocityCommand requested_;
  VelocityCommand latched_;
  int phaseType_ = 0;
  std::int64_t phaseIndex_ = 0;
  std::int64_t phaseUs_;
  std::int64_t controlUs_;
  std::int64_t phaseTimeUs_ = 0;
  std::int64_t elapsedUs_ = 0;
  bool terminated_ = false;
  std::optional<KickOutcome> kick_;
};

}  // namespace fsrl
