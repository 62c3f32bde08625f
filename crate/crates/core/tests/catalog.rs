use persona_dialog::spots::{load_catalog, CatalogError, SpotCatalog};

fn builtin_text() -> String {
    SpotCatalog::builtin().serialize()
}

/// Drops the last spot block from a serialized catalog.
fn without_last_spot(text: &str) -> String {
    let cut = text.rfind("spot s").unwrap();
    text[..cut].to_string()
}

#[test]
fn bundled_catalog_loads() {
    let c = load_catalog(&builtin_text()).unwrap();
    assert_eq!(c.spots().len(), 6);
    assert_eq!(c, SpotCatalog::builtin());
}

#[test]
fn five_spots_are_rejected() {
    let err = load_catalog(&without_last_spot(&builtin_text())).unwrap_err();
    assert_eq!(err, CatalogError::SpotCount(5));
    assert!(err.to_string().contains('6'), "{err}");
}

#[test]
fn two_points_are_rejected() {
    let text = builtin_text();
    let start = text.find("point3:").unwrap();
    let end = start + text[start..].find('\n').unwrap() + 1;
    let broken = format!("{}{}", &text[..start], &text[end..]);
    assert!(matches!(
        load_catalog(&broken),
        Err(CatalogError::Points { found: 2, .. })
    ));
}

#[test]
fn duplicate_ids_are_rejected() {
    let text = without_last_spot(&builtin_text());
    let first = &text[..text[1..].find("spot s").unwrap() + 1];
    let doubled = format!("{text}\n{first}");
    assert!(matches!(load_catalog(&doubled), Err(CatalogError::DuplicateId(id)) if id == "s1"));
}

#[test]
fn unknown_tags_are_rejected() {
    let text = builtin_text().replacen("attrs: ", "attrs: karaoke, ", 1);
    assert!(matches!(load_catalog(&text), Err(CatalogError::UnknownTag { tag, .. }) if tag == "karaoke"));
}
