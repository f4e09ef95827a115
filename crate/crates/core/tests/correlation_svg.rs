use detdrive::correlation::Family;
use detdrive::correlation::svg::*;

#[test]
fn glyph_shapes() {
    assert!(glyph(Family::Detection, 1.0, 1.0, 2.0).starts_with("<circle"));
    let star = glyph(Family::PlannerCentric, 0.0, 0.0, 2.0);
    assert_eq!(star.matches(',').count(), 10);
    let tri = glyph(Family::InverseDistance, 0.0, 0.0, 2.0);
    assert_eq!(tri.matches(',').count(), 3);
}
