//! Post-processing of finished runs: virtual-slot bookkeeping, regret,
//! and trajectory audits.

mod audit;
mod regret;
mod virtual_slots;

pub use audit::{ratio_audit, simplex_audit, RatioAudit, SimplexAudit, RATIO_TOLERANCE};
pub use regret::{
    best_fixed_action, best_from_column_sums, regret_report, uniform_expected_regret,
    RegretReport,
};
pub use virtual_slots::{virtual_slot_map, SlotCheck, VirtualSlot, VirtualSlotMap};
