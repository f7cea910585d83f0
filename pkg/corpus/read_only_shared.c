// expect: race_free
int config = 4;
int out1, out2;
void *t1(void *p) {
  out1 = config * 2;
  return NULL;
}
void *t2(void *p) {
  out2 = config + 1;
  return NULL;
}
int main() {
  create(t1);
  create(t2);
  return 0;
}
