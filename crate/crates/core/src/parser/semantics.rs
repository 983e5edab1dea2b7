use super::frame::{FunctionFrame, NodeRef, PortSpec, Value};
use crate::grammar::{Action, Func};

fn as_frame(v: Value) -> FunctionFrame {
    match v {
        Value::Frame(f) => *f,
        _ => FunctionFrame::default(),
    }
}

fn flatten(v: Value, out: &mut Vec<Value>) {
    match v {
        Value::List(items) => {
            for item in items {
                flatten(item, out);
            }
        }
        Value::Null => {}
        other => out.push(other),
    }
}

fn merge_into(frame: &mut FunctionFrame, v: Value) {
    match v {
        Value::Frame(f) => frame.absorb(*f),
        Value::List(items) => {
            for item in items {
                merge_into(frame, item);
            }
        }
        Value::Ref(r) => frame.sources.push(r),
        _ => {}
    }
}

fn set_field(mut frame: FunctionFrame, key: &str, value: Value) -> FunctionFrame {
    match key {
        "sources" | "source" => frame.sources.extend(value.refs()),
        "targets" | "target" => frame.targets.extend(value.refs()),
        "port" => {
            frame.port = match value.text().as_deref() {
                Some("selection") => PortSpec::Selection,
                Some("data") => PortSpec::Data,
                _ => frame.port,
            }
        }
        _ => {
            if let Some(v) = value.to_option() {
                frame.options.insert(key.to_string(), v);
            }
        }
    }
    frame
}

/// Evaluates a rule action over the values of its RHS constituents.
/// Total: ill-typed arguments degrade to empty values.
pub fn evaluate(action: &Action, children: &[Value]) -> Value {
    match action {
        Action::Ref(n) => children.get(n - 1).cloned().unwrap_or(Value::Null),
        Action::Str(s) => Value::Str(s.clone()),
        Action::Num(n) => Value::Num(*n),
        Action::Call(func, args) => {
            let mut vals = args.iter().map(|a| evaluate(a, children));
            match func {
                Func::Frame => {
                    let kind = vals.next().and_then(|v| v.text()).and_then(|k| k.parse().ok());
                    Value::Frame(Box::new(FunctionFrame::new(kind)))
                }
                Func::Set => {
                    let frame = as_frame(vals.next().unwrap_or(Value::Null));
                    let key = vals.next().and_then(|v| v.text()).unwrap_or_default();
                    let value = vals.next().unwrap_or(Value::Null);
                    Value::Frame(Box::new(set_field(frame, &key, value)))
                }
                Func::Merge => {
                    let mut frame = FunctionFrame::default();
                    for v in vals {
                        merge_into(&mut frame, v);
                    }
                    Value::Frame(Box::new(frame))
                }
                Func::List => {
                    let mut out = Vec::new();
                    for v in vals {
                        flatten(v, &mut out);
                    }
                    Value::List(out)
                }
                Func::Join => Value::Str(vals.filter_map(|v| v.text()).collect()),
                Func::Label => ref_of(vals.next(), NodeRef::ByLabel),
                Func::Type => ref_of(vals.next(), NodeRef::ByType),
                Func::Dataset => ref_of(vals.next(), NodeRef::ByDataset),
                Func::Focus => Value::Ref(NodeRef::ImplicitFocus),
                Func::New => Value::Ref(NodeRef::NewNode(vals.next().and_then(|v| v.text()))),
            }
        }
    }
}

fn ref_of(v: Option<Value>, make: fn(String) -> NodeRef) -> Value {
    match v.and_then(|v| v.text()) {
        Some(t) => Value::Ref(make(t)),
        None => Value::Null,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::PlaceholderKind;
    use crate::tagger::FunctionIndicator;

    fn eval(text: &str, children: &[Value]) -> Value {
        evaluate(&Action::parse(text).unwrap(), children)
    }

    #[test]
    fn builds_frames() {
        let col = |s: &str| Value::Entity(PlaceholderKind::Column, s.into());
        let cols = eval("list(%1, %2)", &[col("mpg"), Value::List(vec![col("hp")])]);
        let v = eval(
            "set(set(frame(visualize), columns, %1), targets, new(%2))",
            &[cols, Value::Entity(PlaceholderKind::NodeType, "histogram".into())],
        );
        let frames = v.into_frames().unwrap();
        assert_eq!(frames[0].signature(), "visualize:columns=mpg+hp,target=new(histogram)");
    }

    #[test]
    fn merge_and_port() {
        let v = eval(
            "merge(frame(highlight), set(frame(), port, selection), set(frame(), sources, label(%1)))",
            &[Value::Entity(PlaceholderKind::NodeLabel, "MyChart".into())],
        );
        let f = v.into_frames().unwrap().remove(0);
        assert_eq!(f.function, Some(FunctionIndicator::Highlight));
        assert_eq!(f.port, PortSpec::Selection);
        assert_eq!(f.sources, [NodeRef::ByLabel("MyChart".into())]);
    }

    #[test]
    fn untyped_frames_are_not_commands() {
        assert!(eval("frame()", &[]).into_frames().is_none());
        assert!(eval("list()", &[]).into_frames().is_none());
        assert_eq!(
            eval(
                "join(%1, '-', %2)",
                &[Value::Str("red".into()), Value::Str("green".into())]
            ),
            Value::Str("red-green".into())
        );
        assert_eq!(eval("%4", &[]), Value::Null);
    }
}
