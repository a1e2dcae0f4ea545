#ifndef RBAL_TESTS_PROCESSES_HPP
#define RBAL_TESTS_PROCESSES_HPP

#include <rbal/decision.hpp>

namespace rbal::testing {

// Binary maintenance process used by the synthetic case study.
inline DecisionProcess synthetic_process() {
  Vec action_utilities(2);
  action_utilities << 0.0, -30.0;
  Vec state_utilities(4);
  state_utilities << 10.0, 10.0, 5.0, -75.0;
  Mat do_nothing(4, 4);
  do_nothing << 0.8, 0.18, 0.015, 0.005,
                0.0, 0.8, 0.15, 0.05,
                0.0, 0.0, 0.8, 0.2,
                0.0, 0.0, 0.0, 1.0;
  Mat repair(4, 4);
  repair << 1.0, 0.0, 0.0, 0.0,
            0.99, 0.01, 0.0, 0.0,
            0.99, 0.0, 0.01, 0.0,
            0.99, 0.0, 0.0, 0.01;
  return DecisionProcess(action_utilities, state_utilities, {do_nothing, repair},
                         7.0, {"do-nothing", "repair"});
}

// Binary maintenance process for the bridge-monitoring case study.
inline DecisionProcess z24_process() {
  Vec action_utilities(2);
  action_utilities << 0.0, -100.0;
  Vec state_utilities(4);
  state_utilities << 10.0, 10.0, -50.0, -1000.0;
  Mat do_nothing(4, 4);
  do_nothing << 0.7, 0.28, 0.015, 0.005,
                0.43, 0.55, 0.015, 0.005,
                0.0, 0.0, 0.8, 0.2,
                0.0, 0.0, 0.0, 1.0;
  Mat repair(4, 4);
  repair << 0.7143, 0.2857, 0.0, 0.0,
            0.4388, 0.5612, 0.0, 0.0,
            0.5996, 0.3904, 0.01, 0.0,
            0.5996, 0.3904, 0.0, 0.01;
  return DecisionProcess(action_utilities, state_utilities, {do_nothing, repair},
                         30.0, {"do-nothing", "repair"});
}

}  // namespace rbal::testing

#endif
