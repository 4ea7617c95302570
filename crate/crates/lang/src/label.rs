use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Change category: `Clean` or one of the sixteen single-statement bug
/// patterns. The discriminant is the label id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum DefectLabel {
    Clean = 0,
    ChangeIdentifierUsed,
    ChangeNumericLiteral,
    ChangeBooleanLiteral,
    ChangeModifier,
    WrongFunctionName,
    SameFunctionMoreArgs,
    SameFunctionLessArgs,
    SameFunctionChangeCaller,
    SameFunctionSwapArgs,
    ChangeBinaryOperator,
    ChangeUnaryOperator,
    ChangeOperand,
    MoreSpecificIf,
    LessSpecificIf,
    MissingThrowsException,
    DeleteThrowsException,
}

pub const NUM_LABELS: usize = 17;

impl DefectLabel {
    pub const ALL: [DefectLabel; NUM_LABELS] = [
        DefectLabel::Clean,
        DefectLabel::ChangeIdentifierUsed,
        DefectLabel::ChangeNumericLiteral,
        DefectLabel::ChangeBooleanLiteral,
        DefectLabel::ChangeModifier,
        DefectLabel::WrongFunctionName,
        DefectLabel::SameFunctionMoreArgs,
        DefectLabel::SameFunctionLessArgs,
        DefectLabel::SameFunctionChangeCaller,
        DefectLabel::SameFunctionSwapArgs,
        DefectLabel::ChangeBinaryOperator,
        DefectLabel::ChangeUnaryOperator,
        DefectLabel::ChangeOperand,
        DefectLabel::MoreSpecificIf,
        DefectLabel::LessSpecificIf,
        DefectLabel::MissingThrowsException,
        DefectLabel::DeleteThrowsException,
    ];

    /// The sixteen defect patterns in matching order.
    pub fn patterns() -> &'static [DefectLabel] {
        &Self::ALL[1..]
    }

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<DefectLabel> {
        Self::ALL.get(id).copied()
    }

    pub fn is_clean(self) -> bool {
        self == DefectLabel::Clean
    }

    pub fn name(self) -> &'static str {
        match self {
            DefectLabel::Clean => "CLEAN",
            DefectLabel::ChangeIdentifierUsed => "CHANGE_IDENTIFIER_USED",
            DefectLabel::ChangeNumericLiteral => "CHANGE_NUMERIC_LITERAL",
            DefectLabel::ChangeBooleanLiteral => "CHANGE_BOOLEAN_LITERAL",
            DefectLabel::ChangeModifier => "CHANGE_MODIFIER",
            DefectLabel::WrongFunctionName => "WRONG_FUNCTION_NAME",
            DefectLabel::SameFunctionMoreArgs => "SAME_FUNCTION_MORE_ARGS",
            DefectLabel::SameFunctionLessArgs => "SAME_FUNCTION_LESS_ARGS",
            DefectLabel::SameFunctionChangeCaller => "SAME_FUNCTION_CHANGE_CALLER",
            DefectLabel::SameFunctionSwapArgs => "SAME_FUNCTION_SWAP_ARGS",
            DefectLabel::ChangeBinaryOperator => "CHANGE_BINARY_OPERATOR",
            DefectLabel::ChangeUnaryOperator => "CHANGE_UNARY_OPERATOR",
            DefectLabel::ChangeOperand => "CHANGE_OPERAND",
            DefectLabel::MoreSpecificIf => "MORE_SPECIFIC_IF",
            DefectLabel::LessSpecificIf => "LESS_SPECIFIC_IF",
            DefectLabel::MissingThrowsException => "MISSING_THROWS_EXCEPTION",
            DefectLabel::DeleteThrowsException => "DELETE_THROWS_EXCEPTION",
        }
    }
}

impl fmt::Display for DefectLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for DefectLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|l| l.name() == s).ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl Serialize for DefectLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for DefectLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
