// expect: race_free
// allow: unknown
atomic_int g;
int seen;
void *t(void *a) {
  g++;
  return NULL;
}
int main() {
  g = 0;
  create(t);
  if (g == 1)
    seen = 1;
  return 0;
}
