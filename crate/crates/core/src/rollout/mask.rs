use std::ops::Range;

use super::{ActionKind, Span, Trajectory};

/// Byte spans excluded from the policy loss: every tool-response block,
/// tags included, in order.
pub fn compute_loss_mask_spans(traj: &Trajectory) -> Vec<Span> {
    traj.steps_of(ActionKind::ToolResponse).map(|s| s.span).collect()
}

/// [`compute_loss_mask_spans`] in Unicode scalar offsets.
pub fn char_mask_spans(traj: &Trajectory) -> Vec<Range<usize>> {
    compute_loss_mask_spans(traj)
        .iter()
        .map(|s| s.to_char_range(&traj.raw))
        .collect()
}
