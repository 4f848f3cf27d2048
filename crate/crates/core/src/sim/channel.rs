use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelId {
    Primary = 0,
    Secondary = 1,
}

impl ChannelId {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> ChannelId {
        match self {
            ChannelId::Primary => ChannelId::Secondary,
            ChannelId::Secondary => ChannelId::Primary,
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelId::Primary => write!(f, "ch1"),
            ChannelId::Secondary => write!(f, "ch2"),
        }
    }
}

/// What a channel is doing in the current slot, as seen by the BSS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelStatus {
    Idle,
    ObssBusy { remaining: u64 },
    BssTx { remaining: u64, success: bool },
    SwitchOverhead { remaining: u64 },
}

impl ChannelStatus {
    pub fn is_idle(&self) -> bool {
        matches!(self, ChannelStatus::Idle)
    }

    pub fn is_obss_busy(&self) -> bool {
        matches!(self, ChannelStatus::ObssBusy { .. })
    }
}
