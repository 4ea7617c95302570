/// Built-in template functions for corpus synthesis. Between them every
/// one of the sixteen patterns has at least one injection site.
pub const DEFAULT_TEMPLATES: &[&str] = &[
    "public boolean isReady(int count, int limit) throws IOException {
    if (count > limit && active) {
        return true;
    }
    return false;
}",
    "int total(int[] values, int start) {
    int sum = 0;
    for (int i = start; i < values.length; i++) {
        sum = sum + values[i];
    }
    return sum;
}",
    "void update(Map map, String key, int value) {
    if (key == null || value < 0) {
        return;
    }
    map.put(key, Math.max(value, 1));
}",
    "private double scale(double x, double factor) {
    double y = x * factor;
    if (!valid(y)) {
        y = 0.5;
    }
    return y;
}",
    "protected void record(Logger logger, String msg) {
    logger.info(msg.trim());
    count++;
}",
    "String label(String name, int id) {
    final String prefix = name.trim();
    return prefix + id;
}",
];
