#include "iab/f1ap.h"

#include <fmt/format.h>

#include "iab/error.h"

namespace iab {

std::string_view to_string(F1State s) {
  switch (s) {
    case F1State::kIdle: return "Idle";
    case F1State::kSetupRequested: return "SetupRequested";
    case F1State::kActive: return "Active";
    case F1State::kReleased: return "Released";
  }
  return "?";
}

std::string_view to_string(UeState s) {
  switch (s) {
    case UeState::kDetached: return "Detached";
    case UeState::kAttaching: return "Attaching";
    case UeState::kConnected: return "Connected";
  }
  return "?";
}

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::kRequested: return "Requested";
    case SessionState::kEstablished: return "Established";
    case SessionState::kReleased: return "Released";
  }
  return "?";
}

std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::kF1Association: return "f1";
    case EntityKind::kUeContext: return "ue_context";
    case EntityKind::kPduSession: return "pdu_session";
  }
  return "?";
}

bool transition_allowed(F1State from, F1State to) {
  switch (from) {
    case F1State::kIdle: return to == F1State::kSetupRequested;
    // Back to Idle when the handshake fails.
    case F1State::kSetupRequested:
      return to == F1State::kActive || to == F1State::kIdle;
    case F1State::kActive: return to == F1State::kReleased;
    case F1State::kReleased: return false;
  }
  return false;
}

bool transition_allowed(UeState from, UeState to) {
  switch (from) {
    case UeState::kDetached: return to == UeState::kAttaching;
    case UeState::kAttaching:
      return to == UeState::kConnected || to == UeState::kDetached;
    case UeState::kConnected: return to == UeState::kDetached;
  }
  return false;
}

bool transition_allowed(SessionState from, SessionState to) {
  return (from == SessionState::kRequested && to == SessionState::kEstablished) ||
         (from != SessionState::kReleased && to == SessionState::kReleased);
}

void ControlPlane::emit(Transition tr) const {
  if (observer_) observer_(tr);
}

void ControlPlane::move(F1Association& a, F1State to, double t,
                        std::string_view cause) {
  if (!transition_allowed(a.state, to)) {
    throw Error(ErrorCode::kInvalidTransition,
                fmt::format("F1 association of DU #{}: {} -> {}", a.du.value,
                            to_string(a.state), to_string(to)));
  }
  Transition tr{t, EntityKind::kF1Association, a.du,
                std::string(to_string(a.state)), std::string(to_string(to)),
                std::string(cause)};
  a.state = to;
  emit(std::move(tr));
}

void ControlPlane::move(UeContext& c, UeState to, double t,
                        std::string_view cause) {
  if (!transition_allowed(c.state, to)) {
    throw Error(ErrorCode::kInvalidTransition,
                fmt::format("UE context #{}: {} -> {}", c.ue.value,
                            to_string(c.state), to_string(to)));
  }
  Transition tr{t, EntityKind::kUeContext, c.ue, std::string(to_string(c.state)),
                std::string(to_string(to)), std::string(cause)};
  c.state = to;
  if (to != UeState::kConnected) c.drb.reset();
  emit(std::move(tr));
}

void ControlPlane::move(PduSession& s, SessionState to, double t,
                        std::string_view cause) {
  if (!transition_allowed(s.state, to)) {
    throw Error(ErrorCode::kInvalidTransition,
                fmt::format("PDU session of MT #{}: {} -> {}", s.mt.value,
                            to_string(s.state), to_string(to)));
  }
  Transition tr{t, EntityKind::kPduSession, s.mt, std::string(to_string(s.state)),
                std::string(to_string(to)), std::string(cause)};
  s.state = to;
  emit(std::move(tr));
}

F1Association& ControlPlane::must_association(NodeId du) {
  auto it = associations_.find(du);
  if (it == associations_.end()) {
    throw Error(ErrorCode::kAssociationNotActive,
                fmt::format("DU #{} has no F1 association", du.value));
  }
  return it->second;
}

UeContext& ControlPlane::must_context(NodeId ue) {
  auto it = contexts_.find(ue);
  if (it == contexts_.end()) {
    throw Error(ErrorCode::kPreconditionViolated,
                fmt::format("UE #{} has no context", ue.value));
  }
  return it->second;
}

F1Association& ControlPlane::begin_setup(NodeId cu, NodeId du, Path transport,
                                         double t) {
  if (transport.hops.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "F1 transport path is empty");
  }
  auto [it, fresh] = associations_.try_emplace(du);
  F1Association& a = it->second;
  if (!fresh && a.state != F1State::kIdle) {
    throw Error(ErrorCode::kPreconditionViolated,
                fmt::format("DU #{} association is {}", du.value,
                            to_string(a.state)));
  }
  a.cu = cu;
  a.du = du;
  a.transport = std::move(transport);
  a.setup_attempts = 1;
  move(a, F1State::kSetupRequested, t, "F1SetupRequest");
  return a;
}

void ControlPlane::complete_setup(NodeId du, double t) {
  move(must_association(du), F1State::kActive, t, "F1SetupResponse");
}

void ControlPlane::fail_setup(NodeId du, double t, std::string_view cause) {
  move(must_association(du), F1State::kIdle, t, cause);
}

std::vector<NodeId> ControlPlane::release(NodeId du, double t,
                                          std::string_view cause) {
  move(must_association(du), F1State::kReleased, t, cause);
  std::vector<NodeId> served;
  for (auto& [ue, ctx] : contexts_) {
    if (ctx.serving_du == du && ctx.state != UeState::kDetached) {
      served.push_back(ue);
      move(ctx, UeState::kDetached, t, cause);
    }
  }
  return served;
}

UeContext& ControlPlane::begin_attach(NodeId ue, NodeId du, NodeId cu,
                                      bool covered, double t) {
  if (!covered) {
    throw Error(ErrorCode::kNotCovered,
                fmt::format("UE #{} is not covered by DU #{}", ue.value, du.value));
  }
  const F1Association* a = association(du);
  if (!a || a->state != F1State::kActive) {
    throw Error(ErrorCode::kDuNotReady,
                fmt::format("DU #{} association is {}", du.value,
                            a ? to_string(a->state) : "absent"));
  }
  auto [it, fresh] = contexts_.try_emplace(ue);
  UeContext& c = it->second;
  if (fresh) c.ue = ue;
  if (c.state != UeState::kDetached) {
    throw Error(ErrorCode::kPreconditionViolated,
                fmt::format("UE #{} context is {}", ue.value, to_string(c.state)));
  }
  c.serving_du = du;
  c.cu = cu;
  move(c, UeState::kAttaching, t, "UeContextSetupRequest");
  return c;
}

void ControlPlane::complete_attach(NodeId ue, const BearerTunnels& drb,
                                   double t) {
  UeContext& c = must_context(ue);
  const F1Association* a = association(c.serving_du);
  if (!a || a->state != F1State::kActive) {
    throw Error(ErrorCode::kDuNotReady,
                fmt::format("DU #{} lost its association", c.serving_du.value));
  }
  c.drb = drb;
  try {
    move(c, UeState::kConnected, t, "UeContextSetupResponse");
  } catch (...) {
    c.drb.reset();
    throw;
  }
}

void ControlPlane::detach(NodeId ue, double t, std::string_view cause) {
  move(must_context(ue), UeState::kDetached, t, cause);
}

void ControlPlane::check_session_allowed(const Scenario& scenario,
                                         NodeId mt) const {
  const UeContext* c = context(mt);
  if (!c || c->state != UeState::kConnected ||
      scenario.node(c->serving_du).role != Role::kDonorDu) {
    throw Error(ErrorCode::kMtDetached,
                fmt::format("MT #{} is not connected through a Donor DU",
                            mt.value));
  }
  const PduSession* s = session(mt);
  if (s && s->state != SessionState::kReleased) {
    throw Error(ErrorCode::kAlreadyEstablished,
                fmt::format("MT #{} already has a PDU session", mt.value));
  }
}

PduSession& ControlPlane::establish_session(const Scenario& scenario, NodeId mt,
                                           NodeId upf, TunnelKey uplink,
                                           TunnelKey downlink, double t) {
  check_session_allowed(scenario, mt);
  if (uplink.teid == downlink.teid) {
    throw Error(ErrorCode::kInvalidArgument,
                "session tunnels must use distinct TEIDs");
  }
  PduSession& s = sessions_[mt];
  s = PduSession{mt, upf, uplink, downlink, SessionState::kRequested};
  emit(Transition{t, EntityKind::kPduSession, mt, "", "Requested",
                  "establish_pdu_session"});
  move(s, SessionState::kEstablished, t, "established");
  return s;
}

void ControlPlane::release_session(NodeId mt, double t,
                                   std::string_view cause) {
  auto it = sessions_.find(mt);
  if (it == sessions_.end()) return;
  if (it->second.state != SessionState::kReleased) {
    move(it->second, SessionState::kReleased, t, cause);
  }
}

void ControlPlane::check_config_update(NodeId du) const {
  const F1Association* a = association(du);
  if (!a || a->state != F1State::kActive) {
    throw Error(ErrorCode::kNotActive,
                fmt::format("DU #{} association is {}", du.value,
                            a ? to_string(a->state) : "absent"));
  }
}

bool ControlPlane::deliverable(const F1Message& msg) const {
  const F1Association* a = association(msg.du);
  return a && a->state != F1State::kIdle && a->state != F1State::kReleased;
}

const F1Association* ControlPlane::association(NodeId du) const {
  auto it = associations_.find(du);
  return it == associations_.end() ? nullptr : &it->second;
}

const UeContext* ControlPlane::context(NodeId ue) const {
  auto it = contexts_.find(ue);
  return it == contexts_.end() ? nullptr : &it->second;
}

const PduSession* ControlPlane::session(NodeId mt) const {
  auto it = sessions_.find(mt);
  return it == sessions_.end() ? nullptr : &it->second;
}

}  // namespace iab
