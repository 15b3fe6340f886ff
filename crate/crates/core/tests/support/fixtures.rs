//! Hand-built fixtures shared by the integration and acceptance tests.

#![allow(dead_code)]

use ctxenc_core::{DepKind, ProgramDependenceGraph, VersionLabel};

pub const LITHO_PATH: &str =
    "litho-widget/src/main/java/com/facebook/litho/widget/EditTextSpec.java";

/// Text-change callback before the commit: the event-handler block runs
/// first, then the text-state block.
pub const LITHO_BEFORE: &str = r#"class EditTextWithEventHandlers extends EditText {
  @Override
  protected void onTextChanged(CharSequence text, int start, int lengthBefore, int lengthAfter) {
    super.onTextChanged(text, start, lengthBefore, lengthAfter);
    if (mTextChangedEventHandler != null) {
      EditText.dispatchTextChangedEvent(mTextChangedEventHandler, EditTextWithEventHandlers.this, text.toString());
    }
    if (mTextState != null) {
      mTextState.set(text);
    }
    int lineCount = getLineCount();
    if (mLineCount != UNMEASURED_LINE_COUNT && mLineCount != lineCount && getParent() != null) {
      requestLayout();
    }
  }
}
"#;

/// After the commit the text-state block is moved in front.
pub const LITHO_AFTER: &str = r#"class EditTextWithEventHandlers extends EditText {
  @Override
  protected void onTextChanged(CharSequence text, int start, int lengthBefore, int lengthAfter) {
    super.onTextChanged(text, start, lengthBefore, lengthAfter);
    if (mTextState != null) {
      mTextState.set(text);
    }
    if (mTextChangedEventHandler != null) {
      EditText.dispatchTextChangedEvent(mTextChangedEventHandler, EditTextWithEventHandlers.this, text.toString());
    }
    int lineCount = getLineCount();
    if (mLineCount != UNMEASURED_LINE_COUNT && mLineCount != lineCount && getParent() != null) {
      requestLayout();
    }
  }
}
"#;

pub const LINE_COUNT_STMT: &str = "int lineCount = getLineCount();";

/// Fifteen statements where 9 controls 13, 10 and 13 feed 13 and 14, and
/// only statement 0 sits two hops away from 13.
pub fn depth_example() -> ProgramDependenceGraph {
    let mut g = ProgramDependenceGraph::new(VersionLabel::After, 15);
    g.add_edge(0, 9, DepKind::Data);
    g.add_edge(0, 10, DepKind::Data);
    g.add_edge(9, 13, DepKind::Control);
    g.add_edge(10, 13, DepKind::Data);
    g.add_edge(13, 14, DepKind::Data);
    // unrelated structure, reachable from 13 only through 0
    g.add_edge(0, 1, DepKind::Data);
    g.add_edge(1, 2, DepKind::Control);
    g.add_edge(2, 3, DepKind::Data);
    g.add_edge(4, 5, DepKind::Data);
    g.add_edge(5, 6, DepKind::Control);
    g.add_edge(6, 7, DepKind::Data);
    g.add_edge(7, 8, DepKind::Data);
    g.add_edge(11, 12, DepKind::Data);
    g.add_edge(3, 11, DepKind::Control);
    g
}
