// expect: race
#include <pthread.h>
pthread_mutex_t m1, m2;
int g;
void *t1(void *p) {
  pthread_mutex_lock(&m1);
  g = 1;
  pthread_mutex_unlock(&m1);
  return NULL;
}
void *t2(void *p) {
  pthread_mutex_lock(&m2);
  g = 2;
  pthread_mutex_unlock(&m2);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, t1, NULL);
  pthread_create(&b, NULL, t2, NULL);
  return 0;
}
